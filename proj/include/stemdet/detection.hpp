#pragma once

#include <optional>
#include <vector>

#include "stemdet/bingeo.hpp"

namespace stemdet {

// One mask object with its boundary analysis. Defects are the accepted
// ones only (depth >= min_defect_depth), sorted by contour position.
struct PlantObject {
    Component component;
    Contour contour;
    std::vector<int> hull;
    std::vector<ConvexityDefect> defects;
};

// Contour span between two neighboring cut-off points, with the derived
// center (area centroid of the span closed by the cut-off segment), root
// (cut-off midpoint) and direction line through both.
struct Leaf {
    Point cutoff_a;
    Point cutoff_b;
    int span_begin = 0; // contour index of the first cut-off point
    int span_end = 0;   // contour index of the second (cyclic)
    Point center;
    Point root;

    Line direction() const { return Line{root, center}; }
};

enum class StemMethod { LeafIntersection, CentroidFallback };

struct StemDetection {
    Point position;
    StemMethod method = StemMethod::CentroidFallback;
    int num_leaves = 0;
    int object_ref = 0; // component label
};

struct DetectorConfig {
    double min_defect_depth = 5.0;     // px, defect acceptance threshold
    int min_leaves = 2;                // minimum leaf count for regression
    double box_inflation = 1.2;        // feasibility box scale about bbox center
    double min_intersect_angle_deg = 5.0; // near-parallel intersection guard
    bool centroid_only = false;        // baseline: always use center of mass

    void validate() const; // throws std::invalid_argument when out of range
};

// Contour/hull/defect analysis of one component; keeps defects with
// depth >= min_defect_depth.
PlantObject make_plant_object(Component component, int mask_height, int mask_width,
                              double min_defect_depth);

// Each neighboring pair of accepted defects bounds one leaf. Fewer than
// two defects yield no leaves. Leaves with a zero-area polygon, a center
// within 0.5 px of the root, or a center outside the bounding box are
// dropped.
std::vector<Leaf> extract_leaves(const PlantObject& object);

// Near-parallel-guarded infinite-line intersection (see geometry.hpp).
std::optional<Point> intersect_directions(const Line& l1, const Line& l2, double min_angle_deg);

// Arithmetic mean of the component's pixel coordinates.
Point centroid(const Component& component);

// Mean of all valid pairwise leaf-direction intersections when at least
// min_leaves leaves exist and the mean falls inside the inflated bounding
// box; otherwise the component centroid (CentroidFallback).
StemDetection estimate_stem(const PlantObject& object, const std::vector<Leaf>& leaves,
                            const DetectorConfig& config);

struct PlantAnalysis {
    PlantObject object;
    std::vector<Leaf> leaves;
    StemDetection stem;
};

// close -> connected components -> per component: contour, hull, defects,
// leaves, stem. Deterministic component order.
std::vector<PlantAnalysis> analyze_mask(const BinaryMask& mask, const DetectorConfig& config,
                                        int kernel_size, int min_area);

std::vector<StemDetection> detect_all(const BinaryMask& mask, const DetectorConfig& config,
                                      int kernel_size, int min_area);

} // namespace stemdet
