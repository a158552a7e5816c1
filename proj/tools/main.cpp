#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "stemdet/batch.hpp"
#include "stemdet/evaluation.hpp"
#include "stemdet/raster.hpp"

namespace {

using stemdet::batch::InputMode;
using stemdet::batch::RunConfig;

void add_pipeline_options(CLI::App* cmd, RunConfig& config, std::string& index,
                          std::string& thresh) {
    cmd->add_option("-i,--input", config.input_dir, "input image directory")->required();
    cmd->add_option("-o,--output", config.output_dir, "output directory")->required();
    cmd->add_option("--index", index, "vegetation index: exg, ndvi or external (inputs are masks)")
        ->check(CLI::IsMember({"exg", "ndvi", "external"}));
    cmd->add_option("--thresh", thresh, "thresholder: otsu, triangle or fixed:<t>");
    cmd->add_option("--kernel", config.kernel_size, "closing kernel size (odd)");
    cmd->add_option("--min-defect", config.detector.min_defect_depth,
                    "convexity-defect depth threshold, px");
    cmd->add_option("--min-leaves", config.detector.min_leaves,
                    "minimum leaf count for the intersection regression");
    cmd->add_option("--min-area", config.min_area, "minimum component area, px");
    cmd->add_option("--threads", config.threads, "worker threads");
    cmd->add_flag("--nir-in-alpha", config.nir_in_alpha,
                  "treat the 4th PNG channel as near-infrared");
    cmd->add_flag("--annotate", config.annotate, "write annotated overlay PNGs");
    cmd->add_flag("--bench", config.benchmark, "collect per-stage timing statistics");
    cmd->add_option("--gt", [&config](const std::vector<std::string>& v) {
        config.gt_path = v.front();
        return true;
    }, "ground-truth CSV for evaluation");
    cmd->add_option("--px-per-cm", [&config](const std::vector<std::string>& v) {
        config.px_per_cm = std::stod(v.front());
        return true;
    }, "pixel scale for the metric match radius");
    cmd->add_option("--radius-cm", config.radius_cm, "true-positive radius, cm");
    cmd->add_flag("--centroid-only", config.detector.centroid_only,
                  "baseline: always report the center of mass");
}

bool apply_choices(RunConfig& config, const std::string& index, const std::string& thresh) {
    if (index == "exg") config.segmentation.index = stemdet::VegIndex::ExG;
    else if (index == "ndvi") config.segmentation.index = stemdet::VegIndex::NDVI;
    else if (index == "external") config.mode = InputMode::FromMasks;

    if (thresh == "otsu") config.segmentation.thresholder = stemdet::Thresholder::Otsu;
    else if (thresh == "triangle") config.segmentation.thresholder = stemdet::Thresholder::Triangle;
    else if (thresh.rfind("fixed:", 0) == 0) {
        config.segmentation.thresholder = stemdet::Thresholder::Fixed;
        try {
            config.segmentation.fixed_threshold = std::stoi(thresh.substr(6));
        } catch (const std::exception&) {
            std::cerr << "bad --thresh value: " << thresh << "\n";
            return false;
        }
        if (config.segmentation.fixed_threshold < 0 || config.segmentation.fixed_threshold > 255) {
            std::cerr << "fixed threshold must be in 0..255\n";
            return false;
        }
    } else {
        std::cerr << "bad --thresh value: " << thresh << "\n";
        return false;
    }
    return true;
}

int run_and_report(const RunConfig& config) {
    const stemdet::batch::RunResult result = stemdet::batch::run(config);
    if (result.exit_code != 1) {
        std::printf("%d image(s), %d failed, %zu detection(s)\n", result.images_processed,
                    result.images_failed, result.detections.size());
        if (result.report) {
            const stemdet::MatchReport& r = *result.report;
            std::printf("tp %d  fp %d  fn %d\nprecision %.4f  recall %.4f  (radius %.1f px)\n",
                        r.tp, r.fp, r.fn, r.precision, r.recall, r.radius_px);
        }
        if (result.timing) std::fputs(stemdet::batch::timing_report_text(*result.timing).c_str(), stdout);
    }
    return result.exit_code;
}

int run_synth(const std::string& out_dir, int images, int plants, int width, int height,
              std::uint64_t seed, double asym_fraction) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    stemdet::FieldSpecParams params;
    params.asym_fraction = asym_fraction;
    std::vector<stemdet::GroundTruthStem> truth;
    for (int i = 0; i < images; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "field_%04d", i);
        stemdet::SynthField field =
            stemdet::generate_field(plants, width, height, params, seed + static_cast<std::uint64_t>(i));
        stemdet::save_mask(field.mask, (fs::path(out_dir) / (std::string(name) + ".png")).string());
        for (stemdet::GroundTruthStem& g : field.truth) {
            g.image_id = name;
            truth.push_back(std::move(g));
        }
    }
    stemdet::write_ground_truth(truth, (fs::path(out_dir) / "gt.csv").string());
    std::printf("wrote %d mask(s) and %zu ground-truth stem(s) to %s\n", images, truth.size(),
                out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"geometric stem detection for top-down field images"};
    app.require_subcommand(1);

    RunConfig config;
    std::string index = "exg";
    std::string thresh = "otsu";

    CLI::App* detect = app.add_subcommand("detect", "run the pipeline and write detections.csv");
    add_pipeline_options(detect, config, index, thresh);

    CLI::App* eval = app.add_subcommand("eval", "run the pipeline and score against ground truth");
    add_pipeline_options(eval, config, index, thresh);

    CLI::App* bench = app.add_subcommand("bench", "run the pipeline with per-stage timing");
    add_pipeline_options(bench, config, index, thresh);

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic field corpus");
    std::string synth_out;
    int synth_images = 10, synth_plants = 20, synth_width = 1280, synth_height = 960;
    std::uint64_t synth_seed = 1;
    double synth_asym = 0.5;
    synth->add_option("-o,--output", synth_out, "output directory")->required();
    synth->add_option("--images", synth_images, "number of field images");
    synth->add_option("--plants", synth_plants, "plants per image");
    synth->add_option("--width", synth_width, "image width, px");
    synth->add_option("--height", synth_height, "image height, px");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--asym-fraction", synth_asym, "fraction of asymmetric plants");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return run_synth(synth_out, synth_images, synth_plants, synth_width, synth_height,
                             synth_seed, synth_asym);

        if (!apply_choices(config, index, thresh)) return 1;
        if (eval->parsed() && (!config.gt_path || !config.px_per_cm)) {
            std::cerr << "eval requires --gt and --px-per-cm\n";
            return 1;
        }
        if (bench->parsed()) config.benchmark = true;
        return run_and_report(config);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}
