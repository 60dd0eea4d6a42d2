#include "adlog/trace_event.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <system_error>

#include <fmt/format.h>

#include "adlog/error.hpp"

namespace adlog {

ParseError::ParseError(const std::string& what, std::size_t column, std::size_t line)
    : Error(line == 0 ? fmt::format("column {}: {}", column, what)
                      : fmt::format("line {}, column {}: {}", line, column, what)),
      reason_(what),
      column_(column),
      line_(line) {}

namespace {

struct Field {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Field> split_fields(std::string_view line) {
  std::vector<Field> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    fields.push_back({line.substr(start, i - start), start + 1});
  }
  return fields;
}

template <typename T>
T parse_integer(const Field& f, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(f.text.data(), f.text.data() + f.text.size(), value);
  if (ec != std::errc() || ptr != f.text.data() + f.text.size()) {
    throw ParseError(fmt::format("invalid {} '{}'", what, f.text), f.column);
  }
  return value;
}

double parse_time(const Field& f) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(f.text.data(), f.text.data() + f.text.size(), value);
  if (ec != std::errc() || ptr != f.text.data() + f.text.size()) {
    throw ParseError(fmt::format("invalid time '{}'", f.text), f.column);
  }
  if (!(value >= 0.0) || value == std::numeric_limits<double>::infinity()) {
    throw ParseError(fmt::format("time must be finite and non-negative, got '{}'", f.text),
                     f.column);
  }
  return value;
}

NodeId parse_node(const Field& f, const char* what) {
  return NodeId(parse_integer<std::uint32_t>(f, what));
}

Address parse_address(const Field& f) {
  auto dot = f.text.find('.');
  if (dot == std::string_view::npos) {
    throw ParseError(fmt::format("address '{}' is not <node>.<port>", f.text), f.column);
  }
  Address addr;
  addr.node = parse_node({f.text.substr(0, dot), f.column}, "address node");
  addr.port = parse_integer<std::int32_t>({f.text.substr(dot + 1), f.column + dot + 1},
                                          "address port");
  return addr;
}

}  // namespace

TraceEvent parse_trace_line(std::string_view line) {
  auto fields = split_fields(line);
  if (fields.empty()) throw ParseError("empty line", 1);
  if (fields.size() != kTraceFieldCount) {
    std::size_t column = fields.size() > kTraceFieldCount ? fields[kTraceFieldCount].column
                                                          : line.size() + 1;
    throw ParseError(
        fmt::format("expected {} fields, found {}", kTraceFieldCount, fields.size()), column);
  }

  TraceEvent ev;
  const Field& code = fields[0];
  if (code.text == "+") {
    ev.kind = EventKind::kEnqueue;
  } else if (code.text == "-") {
    ev.kind = EventKind::kDequeue;
  } else if (code.text == "r") {
    ev.kind = EventKind::kReceive;
  } else {
    throw ParseError(fmt::format("unknown event code '{}'", code.text), code.column);
  }
  ev.time = parse_time(fields[1]);
  ev.from = parse_node(fields[2], "from node");
  ev.to = parse_node(fields[3], "to node");
  ev.protocol = std::string(fields[4].text);
  ev.size = parse_integer<std::int64_t>(fields[5], "size");
  if (ev.size < 0) throw ParseError("negative packet size", fields[5].column);
  if (fields[6].text.size() != kFlagsWidth) {
    throw ParseError(fmt::format("flags field must be {} characters, got '{}'", kFlagsWidth,
                                 fields[6].text),
                     fields[6].column);
  }
  ev.flags = std::string(fields[6].text);
  ev.flow_id = parse_integer<std::int64_t>(fields[7], "flow id");
  ev.src = parse_address(fields[8]);
  ev.dst = parse_address(fields[9]);
  ev.seq = parse_integer<std::int64_t>(fields[10], "sequence number");
  ev.pkt_id = parse_integer<std::int64_t>(fields[11], "packet id");
  return ev;
}

std::string format_trace_line(const TraceEvent& e) {
  return fmt::format("{} {:.6f} {} {} {} {} {} {} {}.{} {}.{} {} {}", static_cast<char>(e.kind),
                     e.time, e.from.value, e.to.value, e.protocol, e.size, e.flags, e.flow_id,
                     e.src.node.value, e.src.port, e.dst.node.value, e.dst.port, e.seq, e.pkt_id);
}

std::vector<TraceEvent> read_trace(std::istream& in) {
  std::vector<TraceEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      events.push_back(parse_trace_line(line));
    } catch (const ParseError& e) {
      throw ParseError(e.reason(), e.column(), line_no);
    }
  }
  return events;
}

std::vector<TraceEvent> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open trace file '{}'", path));
  return read_trace(in);
}

}  // namespace adlog
