#include "gmmimm/trajectory.hpp"

#include "gmmimm/errors.hpp"
#include "gmmimm/io.hpp"

#include <algorithm>
#include <cmath>

namespace gmmimm {

namespace {

constexpr std::array<std::string_view, 4> kColumns = {
    "time_s", "omega_radps", "wheel_left_radps", "wheel_right_radps"};

bool finite(const TrajectorySample &s) {
  return std::isfinite(s.x) && std::isfinite(s.u.left) && std::isfinite(s.u.right) &&
         std::isfinite(s.x_next);
}

} // namespace

void Trajectory::validate(double chain_tolerance) const {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ParameterError("trajectory '" + run_id + "': dt must be positive");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!finite(samples[i]))
      throw ParameterError("trajectory '" + run_id + "': non-finite sample " +
                           std::to_string(i));
    if (i + 1 < samples.size() &&
        std::abs(samples[i].x_next - samples[i + 1].x) > chain_tolerance)
      throw ParameterError("trajectory '" + run_id + "': broken chain between samples " +
                           std::to_string(i) + " and " + std::to_string(i + 1));
  }
}

Trajectory trajectory_from_rows(std::string run_id, std::span<const double> time_s,
                                std::span<const double> omega,
                                std::span<const double> wheel_left,
                                std::span<const double> wheel_right) {
  const std::size_t rows = time_s.size();
  if (omega.size() != rows || wheel_left.size() != rows || wheel_right.size() != rows)
    throw ParameterError("trajectory '" + run_id + "': column lengths differ");
  if (rows < 2)
    throw ParameterError("trajectory '" + run_id + "': at least 2 rows required");
  for (std::size_t i = 1; i < rows; ++i)
    if (!(time_s[i] > time_s[i - 1]))
      throw ParameterError("trajectory '" + run_id + "': time not strictly increasing at row " +
                           std::to_string(i));

  Trajectory traj;
  traj.run_id = std::move(run_id);
  traj.dt = (time_s[rows - 1] - time_s[0]) / static_cast<double>(rows - 1);
  traj.samples.reserve(rows - 1);
  for (std::size_t i = 0; i + 1 < rows; ++i)
    traj.samples.push_back({omega[i], {wheel_left[i], wheel_right[i]}, omega[i + 1]});
  traj.validate();
  return traj;
}

Trajectory load_trajectory_csv(const std::filesystem::path &file) {
  const std::string text = io::read_file(file);
  const std::string name = file.string();
  auto fail = [&](std::size_t line, const std::string &what) -> DataError {
    return DataError(name + ":" + std::to_string(line) + ": " + what);
  };

  std::array<std::vector<double>, 4> cols;
  std::array<std::size_t, 4> index{};
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view line(text.data() + pos, (eol == std::string::npos ? text.size() : eol) - pos);
    pos = eol == std::string::npos ? text.size() : eol + 1;
    ++line_no;
    if (line.empty() || line == "\r")
      continue;
    const auto fields = io::split_csv_line(line);

    if (!have_header) {
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        auto it = std::find(fields.begin(), fields.end(), kColumns[c]);
        if (it == fields.end())
          throw fail(line_no, "missing column '" + std::string(kColumns[c]) + "'");
        index[c] = static_cast<std::size_t>(it - fields.begin());
      }
      have_header = true;
      continue;
    }

    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      if (index[c] >= fields.size())
        throw fail(line_no, "missing value for '" + std::string(kColumns[c]) + "'");
      auto value = io::parse_double(fields[index[c]]);
      if (!value)
        throw fail(line_no, "non-numeric value '" + std::string(fields[index[c]]) + "' in '" +
                                std::string(kColumns[c]) + "'");
      if (!std::isfinite(*value))
        throw fail(line_no, "non-finite value in '" + std::string(kColumns[c]) + "'");
      cols[c].push_back(*value);
    }
    const auto &t = cols[0];
    if (t.size() >= 2 && !(t[t.size() - 1] > t[t.size() - 2]))
      throw fail(line_no, "time_s not strictly increasing");
  }
  if (!have_header)
    throw DataError(name + ": empty file (header required)");
  if (cols[0].size() < 2)
    throw DataError(name + ": at least 2 data rows required, found " +
                    std::to_string(cols[0].size()));

  try {
    return trajectory_from_rows(file.stem().string(), cols[0], cols[1], cols[2], cols[3]);
  } catch (const ParameterError &e) {
    throw DataError(name + ": " + e.what());
  }
}

std::vector<Trajectory> load_trajectories(const std::filesystem::path &path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path))
    throw DataError("path does not exist: " + path.string());
  if (!fs::is_directory(path))
    return {load_trajectory_csv(path)};

  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(path))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw DataError("no .csv run files in " + path.string());

  std::vector<Trajectory> out;
  out.reserve(files.size());
  for (const auto &f : files)
    out.push_back(load_trajectory_csv(f));
  return out;
}

std::string trajectory_to_csv(const Trajectory &traj) {
  std::string out = "time_s,omega_radps,wheel_left_radps,wheel_right_radps\n";
  const auto &s = traj.samples;
  auto row = [&](std::size_t k, double omega, const WheelInput &u) {
    out += io::format_double(static_cast<double>(k) * traj.dt);
    out += ',';
    out += io::format_double(omega);
    out += ',';
    out += io::format_double(u.left);
    out += ',';
    out += io::format_double(u.right);
    out += '\n';
  };
  for (std::size_t k = 0; k < s.size(); ++k)
    row(k, s[k].x, s[k].u);
  // The final row's wheel speeds are never consumed; repeat the last input.
  if (!s.empty())
    row(s.size(), s.back().x_next, s.back().u);
  return out;
}

std::vector<Window> sliding_windows(const Trajectory &traj, std::size_t window,
                                    std::size_t stride) {
  if (window < 3)
    throw ParameterError("window length must be >= 3");
  if (stride < 1)
    throw ParameterError("stride must be >= 1");
  std::vector<Window> out;
  const std::size_t n = traj.samples.size();
  if (window > n)
    return out;
  const std::span<const TrajectorySample> all(traj.samples);
  for (std::size_t start = 0; start + window <= n; start += stride)
    out.push_back({traj.run_id, start, all.subspan(start, window)});
  return out;
}

} // namespace gmmimm
