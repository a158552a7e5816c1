#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stemdet/detection.hpp"
#include "stemdet/evaluation.hpp"
#include "stemdet/segmentation.hpp"

namespace stemdet::batch {

enum class InputMode {
    FromImages, // run vegetation segmentation first
    FromMasks   // inputs are masks already; binarize grayscale at 128
};

struct RunConfig {
    std::string input_dir;
    std::string output_dir;
    InputMode mode = InputMode::FromImages;
    SegmentationConfig segmentation;
    DetectorConfig detector;
    int kernel_size = 9;
    int min_area = 32;
    std::optional<std::string> gt_path;
    std::optional<double> px_per_cm;
    double radius_cm = 0.5;
    bool annotate = false;
    bool benchmark = false;
    int threads = 1;
    bool nir_in_alpha = false;
};

struct DetectionRecord {
    std::string image_id;
    int object_id = 0;
    Point position;
    StemMethod method = StemMethod::CentroidFallback;
    int num_leaves = 0;
};

struct StageStats {
    double mean_ms = 0.0;
    double std_ms = 0.0;
};

// Wall-clock statistics per pipeline stage, file I/O kept apart.
struct TimingReport {
    StageStats mask;
    StageStats stem;
    StageStats io;
    int images = 0;
    double total_ms = 0.0;
};

struct RunResult {
    int exit_code = 0;
    int images_processed = 0;
    int images_failed = 0;
    std::vector<DetectionRecord> detections; // image order, then component order
    std::optional<MatchReport> report;
    std::optional<TimingReport> timing;
};

// Batch front end: processes every readable image in input_dir (up to
// `threads` in parallel, output order independent of thread count),
// writes detections.csv into output_dir, plus optional annotated PNGs,
// match report (text + JSON) and timing report. One corrupt image never
// aborts the batch; failures show up in the exit code.
RunResult run(const RunConfig& config);

// run() with the benchmark flag forced on. Throws when the run fails
// outright instead of returning a partial report.
TimingReport bench(RunConfig config);

// CSV "image_id,object_id,stem_row,stem_col,method,num_leaves", two
// decimal places for the coordinates, deterministic row order.
void write_detections(const std::vector<DetectionRecord>& detections, const std::string& path);

std::vector<DetectionRecord> read_detections(const std::string& path);

std::string timing_report_text(const TimingReport& t);
std::string timing_report_json(const TimingReport& t);
std::string match_report_json(const MatchReport& r);

} // namespace stemdet::batch
