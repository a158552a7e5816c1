#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stemdet/detection.hpp"

namespace stemdet {

struct GroundTruthStem {
    std::string image_id;
    Point position;
};

struct MatchReport {
    int tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0;
    double radius_px = 0.0;
};

// Greedy globally-nearest one-to-one matching: repeatedly pair the
// unmatched detection/truth pair at minimum distance <= radius_px.
// Matched pairs are true positives, leftover detections false positives,
// leftover truths false negatives.
MatchReport match(std::span<const StemDetection> detections,
                  std::span<const GroundTruthStem> truth, double radius_px);

// Like match(), but also reports which truth entries were matched
// (indexed like `truth`), for subset analyses.
MatchReport match_flagged(std::span<const StemDetection> detections,
                          std::span<const GroundTruthStem> truth, double radius_px,
                          std::vector<bool>* truth_matched);

// Metric radius to pixels. Throws on non-positive input.
double cm_to_px(double radius_cm, double px_per_cm);

// Micro-average: sums tp/fp/fn, recomputes the ratios. Throws on mixed
// radii; an empty list yields the all-zero report.
MatchReport aggregate(std::span<const MatchReport> reports);

// Synthetic rosette: leaf_count elliptic leaves radiating from the stem
// at angles 2*pi*i/k (+ phase + jitter), a small disc at the stem keeps
// the union connected. Serves as ground-truth oracle in place of field
// datasets.
struct SynthPlantSpec {
    Point stem;
    int leaf_count = 4;             // k >= 2
    double leaf_length = 36.0;      // px, along the leaf axis
    double leaf_width = 12.0;       // px, across
    double phase_deg = 0.0;         // common rotation of all leaves
    double angle_jitter_deg = 0.0;  // per-leaf, uniform in [-j, +j]
    double length_jitter = 0.0;     // fraction, uniform in [-f, +f]
    std::vector<double> asymmetry;  // per-leaf length multipliers (empty = all 1)
};

// Deterministic per (spec, seed). Throws when leaves overlap each other
// beyond tolerance away from the stem disc.
std::pair<BinaryMask, GroundTruthStem> generate_plant(const SynthPlantSpec& spec, int width,
                                                      int height, std::uint64_t seed);

// Distribution the field generator samples per-plant specs from.
struct FieldSpecParams {
    int leaf_count_min = 3, leaf_count_max = 6;
    double leaf_length_min = 30.0, leaf_length_max = 42.0;
    double leaf_width = 12.0;
    double angle_jitter_deg = 6.0;
    double length_jitter = 0.1;
    double asym_fraction = 0.0; // fraction of plants with one doubled leaf
    double asym_factor = 2.0;
};

struct SynthField {
    BinaryMask mask;
    std::vector<GroundTruthStem> truth;    // placement order
    std::vector<bool> plant_is_asymmetric; // parallel to truth
};

// Places n plants with non-overlapping bounding discs (bounded retries,
// throws when it cannot). Deterministic per seed.
SynthField generate_field(int n_plants, int width, int height, const FieldSpecParams& params,
                          std::uint64_t seed);

// Ground-truth CSV: header "image_id,stem_row,stem_col", UTF-8, LF.
std::vector<GroundTruthStem> read_ground_truth(const std::string& path);
void write_ground_truth(std::span<const GroundTruthStem> truth, const std::string& path);

} // namespace stemdet
