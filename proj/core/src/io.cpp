#include "radiotomo/io.hpp"

#include "radiotomo/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace radiotomo {

using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
    throw IoError("not a number: '" + std::string(text) + "'");
  return value;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t line, const std::string& why) {
  throw IoError(path.string() + ":" + std::to_string(line) + ": " + why);
}

json parse_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& err) {
    throw IoError(path.string() + ": " + err.what());
  }
}

}  // namespace

Scene read_scene(const std::filesystem::path& path) {
  const json j = parse_json(path);
  try {
    const json& g = j.at("grid");
    const auto origin = g.value("origin", std::vector<double>{1.0, 1.0});
    if (origin.size() != 2) throw InvalidArgument("grid origin must have two coordinates");
    Grid grid(g.at("nx").get<std::size_t>(), g.at("ny").get<std::size_t>(),
              g.value("spacing", 1.0), {origin[0], origin[1]});
    std::vector<Point> pts;
    for (const auto& p : j.at("sensors")) {
      if (p.size() != 2) throw InvalidArgument("sensor positions need two coordinates");
      pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    const double lambda = j.at("lambda").get<double>();
    if (!(lambda > 0.0)) throw InvalidArgument("scene lambda must be positive");
    return Scene{grid, SensorSet(std::move(pts)), lambda};
  } catch (const json::exception& err) {
    throw IoError(path.string() + ": malformed scene: " + err.what());
  }
}

void write_scene(const std::filesystem::path& path, const Scene& scene) {
  std::ostringstream out;
  const Grid& g = scene.grid;
  out << "{\n  \"grid\": {\"nx\": " << g.nx() << ", \"ny\": " << g.ny()
      << ", \"spacing\": " << format_double(g.spacing()) << ", \"origin\": ["
      << format_double(g.origin().x) << ", " << format_double(g.origin().y) << "]},\n"
      << "  \"lambda\": " << format_double(scene.lambda) << ",\n  \"sensors\": [";
  for (std::size_t n = 0; n < scene.sensors.size(); ++n) {
    out << (n ? ",\n    [" : "\n    [") << format_double(scene.sensors[n].x) << ", "
        << format_double(scene.sensors[n].y) << "]";
  }
  out << "\n  ]\n}\n";
  write_text(path, out.str());
}

void write_field_csv(const std::filesystem::path& path, const Grid& grid,
                     std::span<const double> values) {
  if (values.size() != grid.size()) throw InvalidArgument("field does not match the grid");
  std::string out;
  for (std::size_t b = 0; b < grid.ny(); ++b) {
    for (std::size_t a = 0; a < grid.nx(); ++a) {
      if (a) out += ',';
      out += format_double(values[grid.index(a, b)]);
    }
    out += '\n';
  }
  write_text(path, out);
}

namespace {

std::vector<std::string> read_grid_cells(const std::filesystem::path& path, const Grid& grid) {
  const auto lines = lines_of(read_text(path));
  std::vector<std::string> cells;
  std::size_t row = 0;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    auto parts = split(lines[ln], ',');
    if (parts.size() != grid.nx())
      fail_at(path, ln + 1, "expected " + std::to_string(grid.nx()) + " values, found " +
                                std::to_string(parts.size()));
    if (++row > grid.ny()) fail_at(path, ln + 1, "more than " + std::to_string(grid.ny()) + " rows");
    for (auto& p : parts) cells.push_back(std::to_string(ln + 1) + "\t" + p);
  }
  if (row != grid.ny())
    throw IoError(path.string() + ": expected " + std::to_string(grid.ny()) + " rows, found " +
                  std::to_string(row));
  return cells;
}

std::pair<std::size_t, std::string> unpack(const std::string& cell) {
  const auto tab = cell.find('\t');
  return {std::stoul(cell.substr(0, tab)), cell.substr(tab + 1)};
}

}  // namespace

std::vector<double> read_field_csv(const std::filesystem::path& path, const Grid& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (const auto& cell : read_grid_cells(path, grid)) {
    const auto [line, text] = unpack(cell);
    try {
      out.push_back(parse_double(text));
    } catch (const IoError& err) {
      fail_at(path, line, err.what());
    }
    if (!std::isfinite(out.back())) fail_at(path, line, "non-finite field value");
  }
  return out;
}

void write_label_csv(const std::filesystem::path& path, const Grid& grid,
                     std::span<const int> labels) {
  if (labels.size() != grid.size()) throw InvalidArgument("labels do not match the grid");
  std::string out;
  for (std::size_t b = 0; b < grid.ny(); ++b) {
    for (std::size_t a = 0; a < grid.nx(); ++a) {
      if (a) out += ',';
      out += std::to_string(labels[grid.index(a, b)] + 1);
    }
    out += '\n';
  }
  write_text(path, out);
}

LabelField read_label_csv(const std::filesystem::path& path, const Grid& grid, int classes) {
  LabelField out;
  out.reserve(grid.size());
  for (const auto& cell : read_grid_cells(path, grid)) {
    const auto [line, text] = unpack(cell);
    int value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      fail_at(path, line, "label '" + text + "' is not an integer");
    if (value < 1 || value > classes)
      fail_at(path, line, "label " + text + " outside 1.." + std::to_string(classes));
    out.push_back(value - 1);
  }
  return out;
}

void write_measurement_log(const std::filesystem::path& path, std::span<const Link> links,
                           std::span<const double> values) {
  if (links.size() != values.size()) throw InvalidArgument("one value per link is required");
  std::string out = "tau,n,n_prime,value\n";
  for (std::size_t tau = 0; tau < links.size(); ++tau) {
    out += std::to_string(tau + 1) + ',' + std::to_string(links[tau].tx + 1) + ',' +
           std::to_string(links[tau].rx + 1) + ',' + format_double(values[tau]) + '\n';
  }
  write_text(path, out);
}

namespace {

std::size_t parse_index(const std::filesystem::path& path, std::size_t line, const std::string& text,
                        const char* what) {
  std::size_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || value == 0)
    fail_at(path, line, std::string(what) + " '" + text + "' is not a positive integer");
  return value;
}

}  // namespace

std::vector<LoggedMeasurement> read_measurement_log(const std::filesystem::path& path,
                                                    std::size_t sensors) {
  const auto lines = lines_of(read_text(path));
  std::vector<LoggedMeasurement> out;
  bool header = true;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    if (header) {
      header = false;
      if (lines[ln].rfind("tau", 0) == 0) continue;
    }
    const auto parts = split(lines[ln], ',');
    if (parts.size() != 4) fail_at(path, ln + 1, "expected 4 columns (tau,n,n_prime,value)");
    parse_index(path, ln + 1, parts[0], "tau");
    const std::size_t n = parse_index(path, ln + 1, parts[1], "sensor index");
    const std::size_t np = parse_index(path, ln + 1, parts[2], "sensor index");
    if (n > sensors || np > sensors)
      fail_at(path, ln + 1, "sensor index outside 1.." + std::to_string(sensors));
    if (n == np) fail_at(path, ln + 1, "link endpoints must differ");
    double value = 0.0;
    try {
      value = parse_double(parts[3]);
    } catch (const IoError& err) {
      fail_at(path, ln + 1, err.what());
    }
    out.push_back({{n - 1, np - 1}, value});
  }
  return out;
}

std::vector<std::pair<double, double>> read_calibration_csv(const std::filesystem::path& path) {
  const auto lines = lines_of(read_text(path));
  std::vector<std::pair<double, double>> out;
  bool header = true;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    if (header) {
      header = false;
      if (lines[ln].rfind("distance", 0) == 0) continue;
    }
    const auto parts = split(lines[ln], ',');
    if (parts.size() != 2) fail_at(path, ln + 1, "expected 2 columns (distance,gain)");
    try {
      out.emplace_back(parse_double(parts[0]), parse_double(parts[1]));
    } catch (const IoError& err) {
      fail_at(path, ln + 1, err.what());
    }
  }
  return out;
}

namespace {

const char* const kCheckpointBlocks[] = {"field_mean", "field_var",  "label_prob", "mean_mean",
                                         "mean_var",   "prec_shape", "prec_scale"};

std::vector<double>* block_of(VariationalState& s, const std::string& name) {
  if (name == "field_mean") return &s.field_mean;
  if (name == "field_var") return &s.field_var;
  if (name == "label_prob") return &s.label_prob;
  if (name == "mean_mean") return &s.mean_mean;
  if (name == "mean_var") return &s.mean_var;
  if (name == "prec_shape") return &s.prec_shape;
  if (name == "prec_scale") return &s.prec_scale;
  return nullptr;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const VbCheckpoint& cp) {
  const VariationalState& s = cp.state;
  std::string out = "{\"format\":\"radiotomo-vb-checkpoint\",\"version\":1,\"sites\":" +
                    std::to_string(s.sites) + ",\"classes\":" + std::to_string(s.classes) +
                    ",\"iteration\":" + std::to_string(cp.iteration) +
                    ",\"converged\":" + (cp.converged ? "true" : "false") +
                    ",\"noise_shape\":" + format_double(s.noise_shape) +
                    ",\"noise_scale\":" + format_double(s.noise_scale) + ",\"elbo_trace\":[";
  for (std::size_t j = 0; j < cp.elbo_trace.size(); ++j) {
    if (j) out += ',';
    out += format_double(cp.elbo_trace[j]);
  }
  out += "]}\n";
  VariationalState copy = s;
  for (const char* name : kCheckpointBlocks) {
    const std::vector<double>& v = *block_of(copy, name);
    const bool per_site = v.size() == s.sites * s.classes && s.sites > 0;
    const std::size_t rows = per_site ? s.sites : 1;
    const std::size_t cols = per_site ? s.classes : v.size();
    out += std::string("# ") + name + " " + std::to_string(rows) + " " + std::to_string(cols) + "\n";
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (c) out += ',';
        out += format_double(v[r * cols + c]);
      }
      out += '\n';
    }
  }
  write_text(path, out);
}

VbCheckpoint read_checkpoint(const std::filesystem::path& path) {
  const auto lines = lines_of(read_text(path));
  if (lines.empty()) throw IoError(path.string() + ": empty checkpoint");
  VbCheckpoint cp;
  VariationalState& s = cp.state;
  try {
    const json head = json::parse(lines[0]);
    if (head.value("format", "") != "radiotomo-vb-checkpoint")
      fail_at(path, 1, "not a VB checkpoint");
    s.sites = head.at("sites").get<std::size_t>();
    s.classes = head.at("classes").get<std::size_t>();
    cp.iteration = head.at("iteration").get<int>();
    cp.converged = head.at("converged").get<bool>();
    s.noise_shape = head.at("noise_shape").get<double>();
    s.noise_scale = head.at("noise_scale").get<double>();
    cp.elbo_trace = head.at("elbo_trace").get<std::vector<double>>();
  } catch (const json::exception& err) {
    fail_at(path, 1, std::string("malformed header: ") + err.what());
  }

  std::size_t ln = 1;
  for (const char* expected : kCheckpointBlocks) {
    if (ln >= lines.size()) throw IoError(path.string() + ": missing block " + expected);
    std::istringstream head(lines[ln]);
    std::string hash, name;
    std::size_t rows = 0, cols = 0;
    if (!(head >> hash >> name >> rows >> cols) || hash != "#" || name != expected)
      fail_at(path, ln + 1, std::string("expected block header for ") + expected);
    std::vector<double>& v = *block_of(s, name);
    v.clear();
    v.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      ++ln;
      if (ln >= lines.size()) throw IoError(path.string() + ": truncated block " + name);
      const auto parts = split(lines[ln], ',');
      if (parts.size() != cols)
        fail_at(path, ln + 1, "expected " + std::to_string(cols) + " values");
      for (const auto& p : parts) {
        try {
          v.push_back(parse_double(p));
        } catch (const IoError& err) {
          fail_at(path, ln + 1, err.what());
        }
      }
    }
    ++ln;
  }
  const std::size_t nk = s.sites * s.classes;
  if (s.field_mean.size() != nk || s.field_var.size() != nk || s.label_prob.size() != nk ||
      s.mean_mean.size() != s.classes || s.mean_var.size() != s.classes ||
      s.prec_shape.size() != s.classes || s.prec_scale.size() != s.classes)
    throw IoError(path.string() + ": block sizes do not match the header dimensions");
  return cp;
}

}  // namespace radiotomo
