#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "adlog/bleu.hpp"
#include "adlog/detect.hpp"
#include "adlog/trainer.hpp"

namespace adlog {

// Human-readable report: side-by-side set A tables, accuracies, degradation
// and flagged pairs.
std::string format_detection_report(const DetectionReport& report);

nlohmann::json detection_report_to_json(const DetectionReport& report);

// Header `pair,bleu`.
void write_bleu_csv(const BleuReport& report, std::ostream& out);

// Header `iteration,mean_nll`.
void write_loss_csv(const LossHistory& history, std::ostream& out);

// Writes through `path.tmp` and renames on success, so a failed write never
// leaves a partial file under `path`.
void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& writer,
                           bool binary = false);

}  // namespace adlog
