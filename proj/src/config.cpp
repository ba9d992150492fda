#include "eitcool/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace eitcool {

namespace {

using K = ValueKind;

// Units: _hz is ordinary frequency (converted to rad/s by the harness),
// _deg degrees, _s seconds, _m metres.
const std::vector<KeySpec> kSchema = {
    {"task", K::Text, "", true, "spectrum | sweep-omega | sweep-delta | dynamics | multimode | thermometry"},
    {"output.name", K::Text, "", false, "stem of the output files; defaults to the config file stem"},

    {"ion.mass_amu", K::Number, "39.962590863", true, "ion mass in atomic mass units"},
    {"ion.wavelength_m", K::Number, "396.959e-9", true, "S1/2 - P1/2 wavelength"},
    {"ion.gamma_hz", K::Number, "20e6", true, "P1/2 decay rate Gamma / 2 pi"},
    {"ion.lande_g_s", K::Number, "2.00225", true, "Lande factor of S1/2"},
    {"ion.lande_g_p", K::Number, "0.6666666666666666", true, "Lande factor of P1/2"},
    {"ion.branching_pd", K::Number, "0.0625", true, "P1/2 -> D3/2 over P1/2 -> S1/2 (not used in the dynamics)"},

    {"field.b_gauss", K::Number, "4.4", true, "magnetic field magnitude; the field points along the coupling beam"},

    {"beams.coupling.detuning_hz", K::Number, "", false, "Delta_sigma / 2 pi from the S- -> P+ resonance; needed by all tasks but thermometry"},
    {"beams.coupling.rabi_hz", K::Number, "", false, "Omega_sigma / 2 pi on S- -> P+"},
    {"beams.coupling.stark_shift_hz", K::Number, "", false, "target delta / 2 pi; Omega_sigma is solved for it"},
    {"beams.cooling.detuning_hz", K::Number, "", false, "Delta_pi / 2 pi from S+ -> P+; defaults to Delta_sigma"},
    {"beams.cooling.rabi_hz", K::Number, "", false, "Omega_pi / 2 pi, as a pure pi beam on S+ -> P+"},
    {"beams.cooling.intensity_ratio", K::Number, "", false, "I_sigma / I_pi; sets Omega_pi = Omega_sigma / sqrt(ratio)"},
    {"beams.cooling.polarization", K::Text, "in-plane", true, "in-plane (in the plane of k and B) | normal"},

    {"geometry.beam_angle_deg", K::Number, "125", true, "angle enclosed by the two k vectors"},
    {"geometry.phi_x_deg", K::Number, "66", true, "angle between k_cool - k_coupling and the x axis"},
    {"geometry.phi_y_deg", K::Number, "71", true, "same for the y axis"},
    {"geometry.phi_z_deg", K::Number, "31", true, "same for the z axis"},

    {"trap.omega_x_hz", K::Number, "", false, "x mode frequency / 2 pi; needed by all tasks but thermometry"},
    {"trap.omega_y_hz", K::Number, "", false, "y mode frequency / 2 pi; needed by all tasks but thermometry"},
    {"trap.omega_z_hz", K::Number, "", false, "z mode frequency / 2 pi; needed by all tasks but thermometry"},

    {"model.variant", K::Text, "four_level_geometry", true, "three_level | four_level_ideal | four_level_geometry"},
    {"model.beat_treatment", K::Text, "periodic", true, "periodic | static"},
    {"solver.periodic_method", K::Text, "fourier", true, "fourier | propagation"},
    {"solver.fourier_harmonics", K::Number, "4", true, "beat harmonics kept by the Fourier solver"},
    {"solver.relaxation_lifetimes", K::Number, "20", true, "propagation: relaxation time in units of 1/Gamma"},
    {"solver.drift_tolerance", K::Number, "1e-8", true, "propagation: period-to-period convergence threshold"},
    {"solver.max_beat_periods", K::Number, "10000", true, "propagation: give up after this many beat periods"},

    {"spectrum.start_hz", K::Number, "", false, "first Delta_pi / 2 pi of the scan"},
    {"spectrum.stop_hz", K::Number, "", false, "last Delta_pi / 2 pi of the scan"},
    {"spectrum.points", K::Number, "401", true, "samples in the scan"},

    {"sweep.mode", K::Text, "y", true, "trap mode used by sweep-omega and sweep-delta"},
    {"sweep.start_hz", K::Number, "", false, "first omega (sweep-omega) or delta (sweep-delta), / 2 pi"},
    {"sweep.stop_hz", K::Number, "", false, "last sweep value / 2 pi"},
    {"sweep.points_per_decade", K::Number, "200", true, "logarithmic grid density"},
    {"sweep.variants", K::TextList, "", false, "sweep-omega: variants to sweep; defaults to model.variant"},

    {"dynamics.mode", K::Text, "y", true, "trap mode evolved by the dynamics task"},
    {"dynamics.n0", K::Number, "16", true, "initial mean occupation"},
    {"dynamics.t_stop_s", K::Number, "2e-3", true, "end of the evolution"},
    {"dynamics.points", K::Number, "201", true, "output samples, t = 0 included"},

    {"multimode.modes", K::TextList, "x, y, z", true, "modes reported by the multimode task"},

    {"thermometry.n_bar", K::NumberList, "0.18, 16", true, "thermal states for the round trip"},
    {"thermometry.eta_probe", K::Number, "", false, "Lamb-Dicke parameter of the probe transition (no default)"},
    {"thermometry.rabi_hz", K::Number, "", false, "carrier Rabi frequency omega0 / 2 pi of the probe"},
    {"thermometry.t_stop_s", K::Number, "", false, "longest probe pulse"},
    {"thermometry.points", K::Number, "200", true, "pulse lengths per flop record"},
    {"thermometry.decay_rate_per_s", K::Number, "0", true, "contrast decay of the flop signal"},
    {"thermometry.sideband", K::Text, "blue", true, "blue | red | carrier, for the fitted record"},
};

const KeySpec* find_spec(std::string_view key) {
  for (const auto& s : kSchema)
    if (s.key == key) return &s;
  return nullptr;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

std::string where(const std::string& name, std::size_t line) {
  return line ? name + ":" + std::to_string(line) + ": " : name + ": ";
}

void check_value(const KeySpec& spec, std::string_view text, const std::string& name, std::size_t line) {
  auto fail = [&](const std::string& what) {
    throw ConfigError(where(name, line) + std::string(spec.key) + ": " + what, std::string(spec.key), line);
  };
  if (text.empty()) fail("empty value");
  switch (spec.kind) {
    case K::Number:
      if (!parse_double(text)) fail("expected a number, got '" + std::string(text) + "'");
      break;
    case K::NumberList:
      for (auto item : split_list(text))
        if (!parse_double(item)) fail("expected a comma-separated list of numbers");
      break;
    case K::TextList:
      for (auto item : split_list(text))
        if (item.empty()) fail("empty list item");
      break;
    case K::Text:
      break;
  }
}

}  // namespace

ConfigError::ConfigError(std::string message, std::string key, std::size_t line)
    : Error(std::move(message)), key_(std::move(key)), line_(line) {}

const std::vector<KeySpec>& config_schema() { return kSchema; }

std::string_view to_string(ValueSource s) {
  switch (s) {
    case ValueSource::File: return "file";
    case ValueSource::Default: return "default";
    case ValueSource::Derived: return "derived";
  }
  return "?";
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string nearest_key(std::string_view key) {
  std::string_view best;
  std::size_t best_d = std::string_view::npos;
  for (const auto& s : kSchema) {
    const std::size_t d = levenshtein(key, s.key);
    if (d < best_d) {
      best_d = d;
      best = s.key;
    }
  }
  return std::string(best);
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ConfigFile ConfigFile::parse(std::string_view text, std::string name) {
  ConfigFile cfg;
  cfg.name_ = std::move(name);
  cfg.text_ = std::string(text);

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(where(cfg.name_, line_no) + "expected 'key = value', got '" + std::string(line) + "'",
                        "", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where(cfg.name_, line_no) + "missing key before '='", "", line_no);

    const KeySpec* spec = find_spec(key);
    if (!spec)
      throw ConfigError(where(cfg.name_, line_no) + "unknown key '" + key + "'; nearest valid key is '" +
                            nearest_key(key) + "'",
                        key, line_no);
    if (auto it = cfg.values_.find(key); it != cfg.values_.end())
      throw ConfigError(where(cfg.name_, line_no) + key + ": already set on line " +
                            std::to_string(it->second.line),
                        key, line_no);
    check_value(*spec, value, cfg.name_, line_no);
    cfg.values_.emplace(key, Value{std::string(value), line_no, ValueSource::File});
  }

  for (const auto& spec : kSchema) {
    if (cfg.values_.count(spec.key)) continue;
    if (!spec.default_value.empty()) {
      cfg.values_.emplace(std::string(spec.key), Value{std::string(spec.default_value), 0, ValueSource::Default});
    } else if (spec.required) {
      throw ConfigError(where(cfg.name_, 0) + "missing required key '" + std::string(spec.key) + "' (" +
                            std::string(spec.help) + ")",
                        std::string(spec.key));
    }
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open file", "");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

bool ConfigFile::has(std::string_view key) const { return values_.find(key) != values_.end(); }

const ConfigFile::Value& ConfigFile::value(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError(where(name_, 0) + "key '" + std::string(key) + "' is not set", std::string(key));
  return it->second;
}

double ConfigFile::number(std::string_view key) const { return *parse_double(value(key).text); }

std::optional<double> ConfigFile::optional_number(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

std::string ConfigFile::text_value(std::string_view key) const { return value(key).text; }

std::vector<double> ConfigFile::number_list(std::string_view key) const {
  std::vector<double> out;
  for (auto item : split_list(value(key).text)) out.push_back(*parse_double(item));
  return out;
}

std::vector<std::string> ConfigFile::text_list(std::string_view key) const {
  std::vector<std::string> out;
  for (auto item : split_list(value(key).text)) out.emplace_back(item);
  return out;
}

std::vector<ProvenanceEntry> ConfigFile::provenance() const {
  std::vector<ProvenanceEntry> out;
  for (const auto& spec : kSchema)
    if (auto it = values_.find(spec.key); it != values_.end())
      out.push_back({std::string(spec.key), it->second.text, it->second.source});
  return out;
}

}  // namespace eitcool
