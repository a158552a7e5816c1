#include "stemdet/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "stemdet/annotate.hpp"
#include "stemdet/raster.hpp"

namespace stemdet::batch {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

StageStats stats_of(const std::vector<double>& samples) {
    StageStats s;
    if (samples.empty()) return s;
    double sum = 0.0;
    for (double v : samples) sum += v;
    s.mean_ms = sum / static_cast<double>(samples.size());
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double v : samples) ss += (v - s.mean_ms) * (v - s.mean_ms);
        s.std_ms = std::sqrt(ss / static_cast<double>(samples.size() - 1));
    }
    return s;
}

struct ImageResult {
    bool ok = false;
    std::string error;
    std::string image_id;
    std::vector<DetectionRecord> detections;
    double mask_ms = 0.0, stem_ms = 0.0, io_ms = 0.0;
    MatchReport report;
    bool has_report = false;
};

} // namespace

void write_detections(const std::vector<DetectionRecord>& detections, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "image_id,object_id,stem_row,stem_col,method,num_leaves\n";
    char buf[128];
    for (const DetectionRecord& d : detections) {
        std::snprintf(buf, sizeof(buf), ",%d,%.2f,%.2f,%s,%d\n", d.object_id, d.position.row,
                      d.position.col,
                      d.method == StemMethod::LeafIntersection ? "intersection" : "centroid",
                      d.num_leaves);
        out << d.image_id << buf;
    }
    if (!out.flush()) throw std::runtime_error(path + ": write failed");
}

std::vector<DetectionRecord> read_detections(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open detections file");
    std::string line;
    if (!std::getline(in, line) || line.rfind("image_id", 0) != 0)
        throw std::runtime_error(path + ": missing detections header");
    std::vector<DetectionRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        DetectionRecord d;
        std::string field;
        std::getline(row, d.image_id, ',');
        std::getline(row, field, ',');
        d.object_id = std::stoi(field);
        std::getline(row, field, ',');
        d.position.row = std::stod(field);
        std::getline(row, field, ',');
        d.position.col = std::stod(field);
        std::getline(row, field, ',');
        d.method = field == "intersection" ? StemMethod::LeafIntersection : StemMethod::CentroidFallback;
        std::getline(row, field);
        d.num_leaves = std::stoi(field);
        out.push_back(std::move(d));
    }
    return out;
}

std::string match_report_json(const MatchReport& r) {
    nlohmann::json j{{"tp", r.tp},         {"fp", r.fp},
                     {"fn", r.fn},         {"precision", r.precision},
                     {"recall", r.recall}, {"radius_px", r.radius_px}};
    return j.dump(2);
}

std::string timing_report_text(const TimingReport& t) {
    char buf[256];
    std::string out = "stage     mean          std\n";
    const auto row = [&](const char* name, const StageStats& s) {
        std::snprintf(buf, sizeof(buf), "%-8s %8.2f ms  %8.2f ms\n", name, s.mean_ms, s.std_ms);
        out += buf;
    };
    row("mask", t.mask);
    row("stem", t.stem);
    row("io", t.io);
    std::snprintf(buf, sizeof(buf), "total    %8.2f ms over %d images\n", t.total_ms, t.images);
    out += buf;
    return out;
}

std::string timing_report_json(const TimingReport& t) {
    nlohmann::json j{
        {"images", t.images},
        {"total_ms", t.total_ms},
        {"stages",
         {{"mask", {{"mean_ms", t.mask.mean_ms}, {"std_ms", t.mask.std_ms}}},
          {"stem", {{"mean_ms", t.stem.mean_ms}, {"std_ms", t.stem.std_ms}}},
          {"io", {{"mean_ms", t.io.mean_ms}, {"std_ms", t.io.std_ms}}}}}};
    return j.dump(2);
}

RunResult run(const RunConfig& config) {
    RunResult result;

    try {
        config.detector.validate();
    } catch (const std::exception& e) {
        std::cerr << "invalid detector config: " << e.what() << "\n";
        result.exit_code = 1;
        return result;
    }
    if (config.kernel_size < 1 || config.kernel_size % 2 == 0) {
        std::cerr << "invalid config: kernel size must be a positive odd integer\n";
        result.exit_code = 1;
        return result;
    }
    if (config.gt_path && !config.px_per_cm) {
        std::cerr << "invalid config: evaluation requires --px-per-cm\n";
        result.exit_code = 1;
        return result;
    }

    std::vector<fs::path> inputs;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(config.input_dir, ec))
        if (entry.is_regular_file() && is_image_file(entry.path())) inputs.push_back(entry.path());
    if (ec) {
        std::cerr << config.input_dir << ": " << ec.message() << "\n";
        result.exit_code = 1;
        return result;
    }
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) {
        std::cerr << "no input images\n";
        result.exit_code = 1;
        return result;
    }

    fs::create_directories(config.output_dir, ec);

    std::map<std::string, std::vector<GroundTruthStem>> truth_by_image;
    if (config.gt_path) {
        try {
            for (GroundTruthStem& g : read_ground_truth(*config.gt_path))
                truth_by_image[g.image_id].push_back(std::move(g));
        } catch (const std::exception& e) {
            std::cerr << e.what() << "\n";
            result.exit_code = 1;
            return result;
        }
    }
    const double radius_px =
        config.px_per_cm ? cm_to_px(config.radius_cm, *config.px_per_cm) : 0.0;

    const auto process_one = [&](const fs::path& path) {
        ImageResult res;
        res.image_id = path.stem().string();
        try {
            const auto t_io = Clock::now();
            LoadOptions opts;
            opts.nir_in_alpha = config.nir_in_alpha;
            const Image image = load_image(path.string(), opts);
            res.io_ms = ms_since(t_io);

            const auto t_mask = Clock::now();
            BinaryMask mask = config.mode == InputMode::FromMasks
                                  ? binarize(gray_to_map(to_gray(image)), 128)
                                  : segment(image, config.segmentation);
            res.mask_ms = ms_since(t_mask);

            const auto t_stem = Clock::now();
            const std::vector<PlantAnalysis> analyses =
                analyze_mask(mask, config.detector, config.kernel_size, config.min_area);
            res.stem_ms = ms_since(t_stem);

            for (const PlantAnalysis& a : analyses) {
                DetectionRecord rec;
                rec.image_id = res.image_id;
                rec.object_id = a.stem.object_ref;
                rec.position = a.stem.position;
                rec.method = a.stem.method;
                rec.num_leaves = a.stem.num_leaves;
                res.detections.push_back(std::move(rec));
            }

            if (config.annotate) {
                const auto t_ann = Clock::now();
                std::vector<PlantObject> objects;
                std::vector<StemDetection> stems;
                for (const PlantAnalysis& a : analyses) {
                    objects.push_back(a.object);
                    stems.push_back(a.stem);
                }
                const fs::path out = fs::path(config.output_dir) / (res.image_id + "_annotated.png");
                save_annotated(image, objects, stems, out.string());
                res.io_ms += ms_since(t_ann);
            }

            if (config.gt_path) {
                std::vector<StemDetection> stems;
                for (const PlantAnalysis& a : analyses) stems.push_back(a.stem);
                const auto it = truth_by_image.find(res.image_id);
                static const std::vector<GroundTruthStem> kEmpty;
                res.report = match(stems, it != truth_by_image.end() ? it->second : kEmpty, radius_px);
                res.has_report = true;
            }
            res.ok = true;
        } catch (const std::exception& e) {
            res.error = e.what();
        }
        return res;
    };

    const auto t_total = Clock::now();
    std::vector<ImageResult> results(inputs.size());
    const int threads = std::max(1, config.threads);
    if (threads == 1) {
        for (std::size_t i = 0; i < inputs.size(); ++i) results[i] = process_one(inputs[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < inputs.size(); i = next.fetch_add(1))
                    results[i] = process_one(inputs[i]);
            });
        }
        for (std::thread& t : pool) t.join();
    }
    const double total_ms = ms_since(t_total);

    // Deterministic output order: image order, then component order.
    std::vector<double> mask_ms, stem_ms, io_ms;
    std::vector<MatchReport> reports;
    for (std::size_t i = 0; i < results.size(); ++i) {
        ImageResult& res = results[i];
        if (!res.ok) {
            std::cerr << inputs[i].string() << ": " << res.error << " (skipped)\n";
            ++result.images_failed;
            continue;
        }
        ++result.images_processed;
        for (DetectionRecord& d : res.detections) result.detections.push_back(std::move(d));
        mask_ms.push_back(res.mask_ms);
        stem_ms.push_back(res.stem_ms);
        io_ms.push_back(res.io_ms);
        if (res.has_report) reports.push_back(res.report);
    }

    try {
        const fs::path csv = fs::path(config.output_dir) / "detections.csv";
        write_detections(result.detections, csv.string());

        if (config.gt_path) {
            result.report = aggregate(reports);
            std::ofstream out(fs::path(config.output_dir) / "report.json", std::ios::binary);
            out << match_report_json(*result.report) << "\n";
        }
        if (config.benchmark) {
            TimingReport timing;
            timing.mask = stats_of(mask_ms);
            timing.stem = stats_of(stem_ms);
            timing.io = stats_of(io_ms);
            timing.images = result.images_processed;
            timing.total_ms = total_ms;
            result.timing = timing;
            std::ofstream out(fs::path(config.output_dir) / "timing.json", std::ios::binary);
            out << timing_report_json(timing) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        result.exit_code = 1;
        return result;
    }

    if (result.images_failed > 0) result.exit_code = 2;
    return result;
}

TimingReport bench(RunConfig config) {
    config.benchmark = true;
    const RunResult result = run(config);
    if (!result.timing) throw std::runtime_error("benchmark run produced no timing data");
    return *result.timing;
}

} // namespace stemdet::batch
