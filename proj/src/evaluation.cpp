#include "stemdet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace stemdet {

namespace {

// rng() output mapped to [a, b); keeps generated corpora identical across
// platforms, unlike std::uniform_real_distribution.
double uniform(std::mt19937_64& rng, double a, double b) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return a + (b - a) * u;
}

int uniform_int(std::mt19937_64& rng, int a, int b) {
    return a + static_cast<int>(rng() % static_cast<std::uint64_t>(b - a + 1));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct PlantPixels {
    std::vector<PixelPoint> pixels; // relative to the stem point, deduplicated
};

// Exact zeros/ones at quarter turns keep axis-aligned rosettes exactly
// rotation-symmetric on the pixel grid.
double snap_trig(double v) {
    if (std::fabs(v) < 1e-9) return 0.0;
    if (std::fabs(v - 1.0) < 1e-9) return 1.0;
    if (std::fabs(v + 1.0) < 1e-9) return -1.0;
    return v;
}

// Rasterizes the rosette around (0, 0); throws when leaves overlap each
// other away from the stem disc.
PlantPixels rasterize_plant(const SynthPlantSpec& spec, std::mt19937_64& rng) {
    const int k = spec.leaf_count;
    if (k < 2) throw std::invalid_argument("leaf_count must be at least 2");
    if (!(spec.leaf_length > 4.0) || !(spec.leaf_width > 2.0))
        throw std::invalid_argument("leaf dimensions too small");
    if (!spec.asymmetry.empty() && static_cast<int>(spec.asymmetry.size()) != k)
        throw std::invalid_argument("asymmetry must have one multiplier per leaf");

    std::vector<double> angles(k), lengths(k);
    for (int i = 0; i < k; ++i) {
        const double jitter = uniform(rng, -spec.angle_jitter_deg, spec.angle_jitter_deg);
        angles[i] = 2.0 * M_PI * i / k + (spec.phase_deg + jitter) * M_PI / 180.0;
        const double lj = uniform(rng, -spec.length_jitter, spec.length_jitter);
        const double mult = spec.asymmetry.empty() ? 1.0 : spec.asymmetry[i];
        lengths[i] = spec.leaf_length * (1.0 + lj) * mult;
    }

    // Each leaf is an ellipse on a narrow stalk; the stalks keep the
    // notches between leaves open almost down to the stem.
    const double stalk = std::max(5.0, 0.2 * spec.leaf_length);
    const double stalk_half_width = 1.5;
    const double disc_radius = std::max(3.0, spec.leaf_width * 0.35);
    const double exclusion = stalk + spec.leaf_width + 2.0;

    // Per-pixel leaf multiplicity; key on the relative coordinate.
    const int reach = static_cast<int>(std::ceil(
                          stalk + *std::max_element(lengths.begin(), lengths.end()))) + 2;
    const int side = 2 * reach + 1;
    std::vector<std::uint8_t> hits(static_cast<std::size_t>(side) * side, 0);
    auto cell = [&](int r, int c) -> std::uint8_t& {
        return hits[static_cast<std::size_t>(r + reach) * side + (c + reach)];
    };

    for (int i = 0; i < k; ++i) {
        const double ur = snap_trig(std::sin(angles[i]));
        const double uc = snap_trig(std::cos(angles[i]));
        const double a = lengths[i] / 2.0, b = spec.leaf_width / 2.0;

        const int span = static_cast<int>(std::ceil(stalk + lengths[i] + b)) + 1;
        for (int r = -span; r <= span; ++r) {
            for (int c = -span; c <= span; ++c) {
                // Rotated-frame test; u along the leaf axis from the stem.
                const double u = c * uc + r * ur;
                const double v = -c * ur + r * uc;
                const double eu = u - (stalk + a);
                const bool in_ellipse = (eu * eu) / (a * a) + (v * v) / (b * b) <= 1.0;
                const bool in_stalk = u >= 0.0 && u <= stalk + 1.0 && std::fabs(v) <= stalk_half_width;
                if ((in_ellipse || in_stalk) && cell(r, c) < 255) ++cell(r, c);
            }
        }
    }

    PlantPixels out;
    int overlap = 0;
    for (int r = -reach; r <= reach; ++r) {
        for (int c = -reach; c <= reach; ++c) {
            const double d = std::hypot(static_cast<double>(r), static_cast<double>(c));
            std::uint8_t h = cell(r, c);
            if (h >= 2 && d > exclusion) ++overlap;
            if (h > 0 || d <= disc_radius) out.pixels.push_back({r, c});
        }
    }
    if (overlap > 0) throw std::runtime_error("leaves overlap beyond tolerance");
    return out;
}

} // namespace

MatchReport match_flagged(std::span<const StemDetection> detections,
                          std::span<const GroundTruthStem> truth, double radius_px,
                          std::vector<bool>* truth_matched) {
    if (!(radius_px > 0.0)) throw std::invalid_argument("radius must be positive");

    struct Pair {
        double dist;
        int det, gt;
    };
    std::vector<Pair> pairs;
    for (int d = 0; d < static_cast<int>(detections.size()); ++d) {
        for (int g = 0; g < static_cast<int>(truth.size()); ++g) {
            const double dist = distance(detections[d].position, truth[g].position);
            if (dist <= radius_px) pairs.push_back({dist, d, g});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.det != b.det) return a.det < b.det;
        return a.gt < b.gt;
    });

    std::vector<bool> det_used(detections.size(), false), gt_used(truth.size(), false);
    MatchReport report;
    report.radius_px = radius_px;
    for (const Pair& p : pairs) {
        if (det_used[p.det] || gt_used[p.gt]) continue;
        det_used[p.det] = gt_used[p.gt] = true;
        ++report.tp;
    }
    report.fp = static_cast<int>(detections.size()) - report.tp;
    report.fn = static_cast<int>(truth.size()) - report.tp;
    report.precision = (report.tp + report.fp) > 0
                           ? static_cast<double>(report.tp) / (report.tp + report.fp)
                           : 0.0;
    report.recall = (report.tp + report.fn) > 0
                        ? static_cast<double>(report.tp) / (report.tp + report.fn)
                        : 0.0;
    if (truth_matched) *truth_matched = gt_used;
    return report;
}

MatchReport match(std::span<const StemDetection> detections,
                  std::span<const GroundTruthStem> truth, double radius_px) {
    return match_flagged(detections, truth, radius_px, nullptr);
}

double cm_to_px(double radius_cm, double px_per_cm) {
    if (!(radius_cm > 0.0) || !(px_per_cm > 0.0))
        throw std::invalid_argument("radius_cm and px_per_cm must be positive");
    return radius_cm * px_per_cm;
}

MatchReport aggregate(std::span<const MatchReport> reports) {
    MatchReport total;
    if (reports.empty()) return total;
    total.radius_px = reports.front().radius_px;
    for (const MatchReport& r : reports) {
        if (r.radius_px != total.radius_px)
            throw std::invalid_argument("cannot aggregate reports with mixed radii");
        total.tp += r.tp;
        total.fp += r.fp;
        total.fn += r.fn;
    }
    total.precision = (total.tp + total.fp) > 0
                          ? static_cast<double>(total.tp) / (total.tp + total.fp)
                          : 0.0;
    total.recall = (total.tp + total.fn) > 0
                       ? static_cast<double>(total.tp) / (total.tp + total.fn)
                       : 0.0;
    return total;
}

std::pair<BinaryMask, GroundTruthStem> generate_plant(const SynthPlantSpec& spec, int width,
                                                      int height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const PlantPixels plant = rasterize_plant(spec, rng);

    BinaryMask mask(width, height);
    const int sr = static_cast<int>(std::lround(spec.stem.row));
    const int sc = static_cast<int>(std::lround(spec.stem.col));
    for (const PixelPoint& p : plant.pixels) {
        const int r = sr + p.row, c = sc + p.col;
        if (mask.in_bounds(r, c)) mask.set(r, c, true);
    }
    return {std::move(mask), GroundTruthStem{"", spec.stem}};
}

SynthField generate_field(int n_plants, int width, int height, const FieldSpecParams& params,
                          std::uint64_t seed) {
    if (n_plants < 0) throw std::invalid_argument("n_plants must be non-negative");
    SynthField field{BinaryMask(width, height), {}, {}};
    if (n_plants == 0) return field;

    std::mt19937_64 rng(mix_seed(seed, 0));

    struct Planned {
        SynthPlantSpec spec;
        double radius = 0.0;
    };
    std::vector<Planned> plants(n_plants);
    for (int i = 0; i < n_plants; ++i) {
        SynthPlantSpec& s = plants[i].spec;
        const bool asym = uniform(rng, 0.0, 1.0) < params.asym_fraction;
        s.leaf_count = asym ? 3 : uniform_int(rng, params.leaf_count_min, params.leaf_count_max);
        s.leaf_length = uniform(rng, params.leaf_length_min, params.leaf_length_max);
        s.leaf_width = params.leaf_width;
        s.phase_deg = uniform(rng, 0.0, 360.0);
        s.angle_jitter_deg = params.angle_jitter_deg;
        s.length_jitter = params.length_jitter;
        if (asym) {
            s.asymmetry.assign(s.leaf_count, 1.0);
            s.asymmetry[0] = params.asym_factor;
        }
        const double max_mult = asym ? params.asym_factor : 1.0;
        plants[i].radius = std::max(5.0, 0.2 * s.leaf_length) +
                           s.leaf_length * (1.0 + params.length_jitter) * max_mult +
                           params.leaf_width / 2.0 + 2.0;
    }

    // Big plants first: sequential random placement then packs reliably.
    std::vector<int> order(plants.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return plants[a].radius > plants[b].radius; });

    constexpr double kSeparationGap = 16.0; // keeps plants apart through closing
    std::vector<Point> centers;
    std::vector<double> radii;
    for (int idx : order) {
        Planned& plant = plants[idx];
        const double margin = plant.radius + 2.0;
        if (2.0 * margin >= width || 2.0 * margin >= height)
            throw std::runtime_error("canvas too small for the requested plants");
        bool placed = false;
        for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
            const double r = uniform(rng, margin, height - 1 - margin);
            const double c = uniform(rng, margin, width - 1 - margin);
            bool ok = true;
            for (std::size_t j = 0; j < centers.size(); ++j) {
                const double need = plant.radius + radii[j] + kSeparationGap;
                if (std::hypot(r - centers[j].row, c - centers[j].col) < need) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            plant.spec.stem = Point{std::floor(r), std::floor(c)};
            centers.push_back(plant.spec.stem);
            radii.push_back(plant.radius);
            placed = true;
        }
        if (!placed) throw std::runtime_error("could not place all plants without overlap");
    }

    for (std::size_t i = 0; i < order.size(); ++i) {
        const Planned& plant = plants[order[i]];
        std::mt19937_64 plant_rng(mix_seed(seed, i + 1));
        PlantPixels pixels = rasterize_plant(plant.spec, plant_rng);
        const int sr = static_cast<int>(std::lround(plant.spec.stem.row));
        const int sc = static_cast<int>(std::lround(plant.spec.stem.col));
        for (const PixelPoint& p : pixels.pixels) {
            const int r = sr + p.row, c = sc + p.col;
            if (field.mask.in_bounds(r, c)) field.mask.set(r, c, true);
        }
        field.truth.push_back(GroundTruthStem{"", plant.spec.stem});
        field.plant_is_asymmetric.push_back(!plant.spec.asymmetry.empty());
    }
    return field;
}

std::vector<GroundTruthStem> read_ground_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open ground-truth file");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty ground-truth file");
    if (line.rfind("image_id", 0) != 0)
        throw std::runtime_error(path + ": missing ground-truth header");

    std::vector<GroundTruthStem> truth;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        GroundTruthStem g;
        std::string field;
        if (!std::getline(row, g.image_id, ',') || !std::getline(row, field, ','))
            throw std::runtime_error(path + ": malformed row " + std::to_string(line_no));
        try {
            g.position.row = std::stod(field);
            if (!std::getline(row, field)) throw std::invalid_argument("missing column");
            g.position.col = std::stod(field);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ": malformed row " + std::to_string(line_no));
        }
        truth.push_back(std::move(g));
    }
    return truth;
}

void write_ground_truth(std::span<const GroundTruthStem> truth, const std::string& path) {
    std::ofstream out(path, std::ios::binary); // binary: LF line endings everywhere
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "image_id,stem_row,stem_col\n";
    char buf[64];
    for (const GroundTruthStem& g : truth) {
        std::snprintf(buf, sizeof(buf), ",%.2f,%.2f\n", g.position.row, g.position.col);
        out << g.image_id << buf;
    }
    if (!out.flush()) throw std::runtime_error(path + ": write failed");
}

} // namespace stemdet
