#include "gmmimm/config.hpp"

#include "gmmimm/errors.hpp"
#include "gmmimm/io.hpp"

#include <cmath>
#include <sstream>

namespace gmmimm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    auto item = trim(s.substr(start, pos == s.npos ? s.npos : pos - start));
    if (!item.empty())
      out.push_back(item);
    if (pos == s.npos)
      break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  auto v = io::parse_double(trim(value));
  if (!v || !std::isfinite(*v))
    throw ParameterError("config '" + std::string(key) + "': expected a number, got '" +
                         std::string(value) + "'");
  return *v;
}

std::uint64_t to_uint(std::string_view key, std::string_view value) {
  const double v = to_double(key, value);
  if (v < 0 || v != std::floor(v) || v > 9.007199254740992e15)
    throw ParameterError("config '" + std::string(key) + "': expected a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

template <class T> std::string join(const std::vector<T> &items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i)
      out += sep;
    if constexpr (std::is_same_v<T, double>)
      out += io::format_double(items[i]);
    else if constexpr (std::is_same_v<T, std::string>)
      out += items[i];
    else
      out += std::to_string(items[i]);
  }
  return out;
}

std::string_view to_string(InitialStateMode mode) {
  return mode == InitialStateMode::Zero ? "zero" : "first_measurement";
}

std::string_view to_string(DwellMode mode) {
  return mode == DwellMode::Fixed ? "fixed" : "exponential";
}

} // namespace

const std::vector<std::string_view> &config_keys() {
  static const std::vector<std::string_view> keys = {
      "data_dir",          "output_dir",          "window",          "stride",
      "components",        "seed",                "max_iter",        "tol",
      "init_mode",         "q",                   "r",               "x0_mode",
      "p0",                "tr_diag",             "tr_matrix",       "weight_prior",
      "tail",              "seen",                "unseen",          "workers",
      "synth_regimes",     "synth_dwell",         "synth_dwell_mode", "synth_process_noise_std",
      "synth_measurement_noise_std", "synth_input_low", "synth_input_high", "synth_period_min",
      "synth_period_max",  "synth_initial_state", "synth_steps",     "synth_runs",
      "synth_seed",        "synth_dt",            "synth_run_prefix"};
  return keys;
}

void set_config_value(PipelineConfig &c, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "data_dir")
    c.data_dir = std::string(value);
  else if (key == "output_dir")
    c.output_dir = std::string(value);
  else if (key == "window")
    c.window = to_uint(key, value);
  else if (key == "stride")
    c.stride = to_uint(key, value);
  else if (key == "components") {
    c.components.clear();
    for (auto item : split(value, ','))
      c.components.push_back(to_uint(key, item));
  } else if (key == "seed")
    c.seed = to_uint(key, value);
  else if (key == "max_iter")
    c.max_iter = to_uint(key, value);
  else if (key == "tol")
    c.tol = to_double(key, value);
  else if (key == "init_mode")
    c.init_mode = parse_init_mode(value);
  else if (key == "q")
    c.q = to_double(key, value);
  else if (key == "r")
    c.r = to_double(key, value);
  else if (key == "x0_mode")
    c.x0_mode = parse_initial_state_mode(value);
  else if (key == "p0")
    c.p0 = to_double(key, value);
  else if (key == "tr_diag")
    c.tr_diag = to_double(key, value);
  else if (key == "tr_matrix") {
    c.tr_matrix.clear();
    for (auto row : split(value, ';'))
      for (auto item : split(row, ','))
        c.tr_matrix.push_back(to_double(key, item));
  } else if (key == "weight_prior")
    c.weight_prior = parse_weight_prior(value);
  else if (key == "tail")
    c.tail = to_double(key, value);
  else if (key == "seen" || key == "unseen") {
    auto &list = key == "seen" ? c.seen : c.unseen;
    list.clear();
    for (auto item : split(value, ','))
      list.emplace_back(item);
  } else if (key == "workers")
    c.workers = to_uint(key, value);
  else if (key == "synth_regimes") {
    c.synth.regimes.clear();
    for (auto regime : split(value, ';')) {
      const auto parts = split(regime, ',');
      if (parts.size() != 3)
        throw ParameterError("config 'synth_regimes': each regime needs 'a, b1, b2'");
      c.synth.regimes.push_back(
          {to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2])});
    }
  } else if (key == "synth_dwell")
    c.synth.dwell = to_double(key, value);
  else if (key == "synth_dwell_mode")
    c.synth.dwell_mode = parse_dwell_mode(value);
  else if (key == "synth_process_noise_std")
    c.synth.process_noise_std = to_double(key, value);
  else if (key == "synth_measurement_noise_std")
    c.synth.measurement_noise_std = to_double(key, value);
  else if (key == "synth_input_low")
    c.synth.input.low = to_double(key, value);
  else if (key == "synth_input_high")
    c.synth.input.high = to_double(key, value);
  else if (key == "synth_period_min")
    c.synth.input.period_min = to_uint(key, value);
  else if (key == "synth_period_max")
    c.synth.input.period_max = to_uint(key, value);
  else if (key == "synth_initial_state")
    c.synth.initial_state = to_double(key, value);
  else if (key == "synth_steps")
    c.synth.steps = to_uint(key, value);
  else if (key == "synth_runs")
    c.synth.runs = to_uint(key, value);
  else if (key == "synth_seed")
    c.synth.seed = to_uint(key, value);
  else if (key == "synth_dt")
    c.synth.dt = to_double(key, value);
  else if (key == "synth_run_prefix")
    c.synth.run_prefix = std::string(value);
  else
    throw ParameterError("unknown config key '" + std::string(key) + "'");
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    auto line = text.substr(pos, (eol == text.npos ? text.size() : eol) - pos);
    pos = eol == text.npos ? text.size() : eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != line.npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == line.npos)
      throw ParameterError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    set_config_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

PipelineConfig load_config(const std::filesystem::path &file) {
  std::string text;
  try {
    text = io::read_file(file);
  } catch (const DataError &e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  return parse_config(text);
}

std::string config_to_text(const PipelineConfig &c) {
  std::ostringstream out;
  out << "data_dir = " << c.data_dir.string() << "\n"
      << "output_dir = " << c.output_dir.string() << "\n"
      << "window = " << c.window << "\n"
      << "stride = " << c.stride << "\n"
      << "components = " << join(c.components, ", ") << "\n"
      << "seed = " << c.seed << "\n"
      << "max_iter = " << c.max_iter << "\n"
      << "tol = " << io::format_double(c.tol) << "\n"
      << "init_mode = " << to_string(c.init_mode) << "\n"
      << "q = " << io::format_double(c.q) << "\n"
      << "r = " << io::format_double(c.r) << "\n"
      << "x0_mode = " << to_string(c.x0_mode) << "\n"
      << "p0 = " << io::format_double(c.p0) << "\n"
      << "tr_diag = " << io::format_double(c.tr_diag) << "\n"
      << "tr_matrix = " << join(c.tr_matrix, ", ") << "\n"
      << "weight_prior = " << to_string(c.weight_prior) << "\n"
      << "tail = " << io::format_double(c.tail) << "\n"
      << "seen = " << join(c.seen, ", ") << "\n"
      << "unseen = " << join(c.unseen, ", ") << "\n"
      << "workers = " << c.workers << "\n";
  std::vector<std::string> regimes;
  for (const auto &r : c.synth.regimes)
    regimes.push_back(io::format_double(r[0]) + ", " + io::format_double(r[1]) + ", " +
                      io::format_double(r[2]));
  out << "synth_regimes = " << join(regimes, "; ") << "\n"
      << "synth_dwell = " << io::format_double(c.synth.dwell) << "\n"
      << "synth_dwell_mode = " << to_string(c.synth.dwell_mode) << "\n"
      << "synth_process_noise_std = " << io::format_double(c.synth.process_noise_std) << "\n"
      << "synth_measurement_noise_std = " << io::format_double(c.synth.measurement_noise_std)
      << "\n"
      << "synth_input_low = " << io::format_double(c.synth.input.low) << "\n"
      << "synth_input_high = " << io::format_double(c.synth.input.high) << "\n"
      << "synth_period_min = " << c.synth.input.period_min << "\n"
      << "synth_period_max = " << c.synth.input.period_max << "\n"
      << "synth_initial_state = " << io::format_double(c.synth.initial_state) << "\n"
      << "synth_steps = " << c.synth.steps << "\n"
      << "synth_runs = " << c.synth.runs << "\n"
      << "synth_seed = " << c.synth.seed << "\n"
      << "synth_dt = " << io::format_double(c.synth.dt) << "\n"
      << "synth_run_prefix = " << c.synth.run_prefix << "\n";
  return out.str();
}

void PipelineConfig::validate() const {
  if (window < 3)
    throw ParameterError("window must be >= 3");
  if (stride < 1)
    throw ParameterError("stride must be >= 1");
  if (components.empty())
    throw ParameterError("components list is empty");
  for (auto m : components)
    if (m < 1)
      throw ParameterError("component counts must be >= 1");
  if (!(tol >= 0.0))
    throw ParameterError("tol must be >= 0");
  if (!(q > 0.0) || !(r > 0.0) || !(p0 > 0.0))
    throw ParameterError("q, r and p0 must be positive");
  if (!(tr_diag > 0.0 && tr_diag <= 1.0))
    throw ParameterError("tr_diag must be in (0, 1]");
  if (!tr_matrix.empty()) {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(tr_matrix.size())));
    if (side * side != tr_matrix.size())
      throw ParameterError("tr_matrix must be square");
    for (auto m : components)
      if (m != side)
        throw ParameterError("tr_matrix size does not match every component count");
    TransitionMatrix(side, tr_matrix);
  }
  if (!(tail > 0.0 && tail < 0.5))
    throw ParameterError("tail must be in (0, 0.5)");
  if (workers < 1)
    throw ParameterError("workers must be >= 1");
  for (const auto &id : seen)
    for (const auto &other : unseen)
      if (id == other)
        throw ParameterError("run '" + id + "' is listed as both seen and unseen");
}

ImmRunConfig PipelineConfig::imm_config() const {
  ImmRunConfig out;
  out.tr_diag = tr_diag;
  out.transition = tr_matrix;
  out.x0_mode = x0_mode;
  out.p0 = p0;
  out.options.weight_prior = weight_prior;
  return out;
}

} // namespace gmmimm
