#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "eitcool/config.hpp"
#include "eitcool/cooling.hpp"
#include "eitcool/spectrum.hpp"

namespace eitcool {

inline constexpr std::string_view kVersion = "1.0.0";

enum class Task { Spectrum, SweepOmega, SweepDelta, Dynamics, Multimode, Thermometry };
std::string_view to_string(Task t);

// Beams, field and trap built from a configuration.
//
// Lab frame: the trap axes are x, y, z. delta k = k_cool - k_coupling points
// along (cos phi_x, cos phi_y, cos phi_z) (normalized), the two beams enclose
// geometry.beam_angle_deg and lie in the plane spanned by delta k and the
// lab z axis. The field points along the coupling beam, which is pure sigma+.
struct Experiment {
  SystemConfig system;
  std::array<TrapMode, 3> modes;
  double coupling_rabi;  // Omega_sigma on S- -> P+, rad/s
  double cooling_rabi;   // Omega_pi as a pure pi beam on S+ -> P+, rad/s
  std::vector<ProvenanceEntry> derived;

  const TrapMode& mode(std::string_view label) const;
};

Experiment make_experiment(const ConfigFile& cfg);

// Parses, then checks every constraint the selected task depends on.
ConfigFile load_config(const std::filesystem::path& path);
void validate(const ConfigFile& cfg);

struct RunOutput {
  std::string stem;
  std::string csv;
  std::string meta;
  std::vector<std::string> failures;  // one line per failed point
};

RunOutput run_task(const ConfigFile& cfg, unsigned threads = 1, std::ostream* log = nullptr);

// Writes <out_dir>/<stem>.csv and .meta. Returns the process exit status:
// 0 on success, 3 when some points failed (partial output still written).
int write_run(const RunOutput& out, const std::filesystem::path& out_dir);

// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

}  // namespace eitcool
