#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "snictorus/rotation.hpp"
#include "snictorus/svg.hpp"

namespace snic {

// ============================================================================
// Attractors
// ============================================================================

enum class AttractorKind { equilibrium, periodic_orbit, quasiperiodic };

std::string_view to_string(AttractorKind k);

struct Attractor {
    AttractorKind kind = AttractorKind::equilibrium;
    Vec2 point;
    Homotopy type;            ///< periodic orbits and quasiperiodic windings
    double exponent = 0.0;    ///< largest eigenvalue real part, or Floquet integral of div v per period
    double period = 0.0;
};

struct AttractorLabel {
    std::vector<Attractor> attractors;
    bool coexistence = false;  ///< at least two attractors of distinct kinds
    int equilibria = 0;
    bool unresolved = false;
    std::string note;

    int count(AttractorKind k) const;
    /// 0 unresolved or none, 1 equilibrium only, 2 periodic only, 3 quasiperiodic, 4 coexistence.
    int color_code() const;
};

struct AttractorOptions {
    RegimeOptions regime{};
    int orbit_samples = 16;
    double settle_time = 500.0;  ///< transient discarded before a periodic orbit is converged
    std::vector<Vec2> seeds;     ///< extra starting points, e.g. attractors at a neighbouring parameter
};

/// Sinks from the equilibrium search; periodic attractors from the return map (no equilibria) or
/// from converging winding orbits, kept when their Floquet integral is negative; quasiperiodic
/// evidence when winding is found but no periodic orbit resolves.
AttractorLabel attractor_classify(const Field& f, const AttractorOptions& opts = {});

/// Follows attractors along mu(s) = from + s (to - from), s = k/(n-1), seeding each point with
/// the attractors of the previous one.
std::vector<AttractorLabel> attractor_continuation(const Family& family, Vec2 from, Vec2 to, int n,
                                                   const AttractorOptions& opts = {});

// ============================================================================
// Parameter-plane scans
// ============================================================================

enum class Classifier { count, regime, attractor };

std::string_view to_string(Classifier c);
Classifier parse_classifier(const std::string& name);

struct ScanConfig {
    Family family = Family::uncoupled();
    ParameterGrid grid{-0.1, 0.1, -0.1, 0.1, 101, 101};
    Classifier classifier = Classifier::count;
    RegimeOptions regime{};
    AttractorOptions attractor{};
    /// Attractor scans: sweep each mu1 column from the top down, seeding cells with the attractors
    /// found in the cell above.
    bool continuation = true;
    unsigned threads = 0;
    std::uint64_t seed = 12345;
    std::string name;

    /// Throws PreconditionError on resolution < 2 or non-positive tolerances.
    void validate() const;
};

struct ScanCell {
    Vec2 mu;
    int equilibria = -1;
    RegimeLabel regime;
    AttractorLabel attractor;
    int code = 0;
    std::string note;
};

struct ScanResult {
    ScanConfig config;
    std::vector<ScanCell> cells;  ///< row-major with mu2 outer

    const ScanCell& at(int i, int j) const { return cells[static_cast<std::size_t>(j) * config.grid.nx + i]; }
    RasterLayer raster() const;
};

/// Per-cell failures become unresolved cells. Results depend only on the config and seed.
ScanResult scan(const ScanConfig& config);

/// One row per cell; the columns depend on the classifier.
void write_scan_csv(std::ostream& out, const ScanResult& r);
/// Config echo and label histogram.
void write_scan_json(std::ostream& out, const ScanResult& r);

/// Named configurations: uncoupled-counts, explicit-regimes, box-counts, tpoint-regimes (regimes near
/// the symmetric T-point), excitatory-attractors and inhibitory-attractors (the same grid time-reversed).
ScanConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Curves, cusp and legend for a scan of a coupled family.
std::string render_scan_svg(const ScanResult& r, const std::string& title = "");

}  // namespace snic
