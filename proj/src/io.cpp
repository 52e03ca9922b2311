#include "fflmpi/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace fflmpi {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

bool parse_number(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(t.c_str(), &end);
  // ERANGE on underflow still yields the nearest subnormal
  const bool range_ok = errno == 0 || (errno == ERANGE && std::abs(out) < std::numeric_limits<double>::min());
  return range_ok && end == t.c_str() + t.size() && std::isfinite(out);
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  return in;
}

void write_meta(std::ostream& out, const Metadata& meta) {
  for (const auto& [k, v] : meta) out << "# " << k << ": " << v << '\n';
}

std::string join(const Vector& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  return s;
}

Vector parse_row(const std::string& line, const std::filesystem::path& path) {
  const auto cells = split(line, ',');
  Vector v(static_cast<Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!parse_number(cells[i], v[static_cast<Index>(i)]))
      throw Error(ErrorKind::io, "malformed number '" + cells[i] + "' in " + path.string());
  }
  return v;
}

struct CsvContent {
  Metadata meta;
  std::vector<Vector> rows;
};

CsvContent read_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  CsvContent c;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string body = trim(t.substr(1));
      const auto colon = body.find(':');
      if (colon != std::string::npos) c.meta.emplace_back(trim(body.substr(0, colon)), trim(body.substr(colon + 1)));
      continue;
    }
    c.rows.push_back(parse_row(t, path));
  }
  for (const auto& r : c.rows) {
    if (r.size() != c.rows.front().size()) throw Error(ErrorKind::io, "ragged rows in " + path.string());
  }
  return c;
}

const std::string* find_meta(const Metadata& meta, const std::string& key) {
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

void write_image_csv(const std::filesystem::path& path, const ImageGrid& image, const Metadata& meta) {
  std::ofstream out = open_out(path);
  write_meta(out, meta);
  for (Index iy = 0; iy < image.values.rows(); ++iy) out << join(image.values.row(iy).transpose()) << '\n';
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

ImageGrid read_image_csv(const std::filesystem::path& path, double fov_half) {
  const CsvContent c = read_csv(path);
  const Index n = static_cast<Index>(c.rows.size());
  if (n < 2 || c.rows.front().size() != n) throw Error(ErrorKind::io, "image CSV is not a square grid: " + path.string());
  ImageGrid g = make_grid(static_cast<int>(n), fov_half);
  for (Index iy = 0; iy < n; ++iy) g.values.row(iy) = c.rows[static_cast<std::size_t>(iy)].transpose();
  return g;
}

void write_pgm(const std::filesystem::path& path, const Matrix& values, const Metadata& meta) {
  const double lo = values.minCoeff(), hi = values.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  std::ofstream out = open_out(path);
  out << "P5\n";
  for (const auto& [k, v] : meta) out << "# " << k << ": " << v << '\n';
  out << values.cols() << ' ' << values.rows() << "\n65535\n";
  for (Index r = values.rows() - 1; r >= 0; --r) {
    for (Index col = 0; col < values.cols(); ++col) {
      const double x = std::clamp((values(r, col) - lo) / span, 0.0, 1.0);
      const auto q = static_cast<std::uint16_t>(std::lround(x * 65535.0));
      out.put(static_cast<char>(q >> 8));
      out.put(static_cast<char>(q & 0xff));
    }
  }
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
  std::ostringstream side;
  write_meta(side, meta);
  side << "min = " << format_double(lo) << "\nmax = " << format_double(hi) << '\n';
  write_text(path.string() + ".txt", side.str());
}

void write_pgm(const std::filesystem::path& path, const ImageGrid& image, const Metadata& meta) {
  write_pgm(path, image.values, meta);
}

PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  auto token = [&]() {
    std::string t;
    while (t.empty()) {
      int ch = in.peek();
      if (ch == EOF) throw Error(ErrorKind::io, "truncated PGM header in " + path.string());
      if (ch == '#') {
        std::string skip;
        std::getline(in, skip);
      } else if (std::isspace(ch)) {
        in.get();
      } else {
        in >> t;
      }
    }
    return t;
  };
  if (token() != "P5") throw Error(ErrorKind::io, "not a binary PGM: " + path.string());
  PgmImage img;
  img.width = std::stoi(token());
  img.height = std::stoi(token());
  if (std::stoi(token()) != 65535) throw Error(ErrorKind::io, "expected a 16-bit PGM: " + path.string());
  in.get();
  img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  for (auto& p : img.pixels) {
    const int hi = in.get(), lo = in.get();
    if (lo == EOF || hi == EOF) throw Error(ErrorKind::io, "truncated PGM data in " + path.string());
    p = static_cast<std::uint16_t>((hi << 8) | lo);
  }
  return img;
}

// ---------------------------------------------------------------------------
// Sinograms and signals
// ---------------------------------------------------------------------------

void write_sinogram_csv(const std::filesystem::path& path, const Sinogram& sinogram, const Metadata& meta) {
  std::ofstream out = open_out(path);
  write_meta(out, meta);
  out << "# angles: " << join(sinogram.angles) << '\n';
  out << "# s_grid: " << join(sinogram.s_grid) << '\n';
  for (Index a = 0; a < sinogram.values.rows(); ++a) out << join(sinogram.values.row(a).transpose()) << '\n';
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

Sinogram read_sinogram_csv(const std::filesystem::path& path) {
  const CsvContent c = read_csv(path);
  const std::string* angles = find_meta(c.meta, "angles");
  const std::string* s_grid = find_meta(c.meta, "s_grid");
  if (!angles || !s_grid) throw Error(ErrorKind::io, "sinogram CSV lacks angle or s_grid header: " + path.string());
  Sinogram s;
  s.angles = parse_row(*angles, path);
  s.s_grid = parse_row(*s_grid, path);
  if (static_cast<Index>(c.rows.size()) != s.angles.size() || (c.rows.size() && c.rows.front().size() != s.s_grid.size()))
    throw Error(ErrorKind::io, "sinogram CSV dimensions disagree with its header: " + path.string());
  s.values.resize(s.angles.size(), s.s_grid.size());
  for (Index a = 0; a < s.angles.size(); ++a) s.values.row(a) = c.rows[static_cast<std::size_t>(a)].transpose();
  return s;
}

void write_signal_csv(const std::filesystem::path& path, const SignalTrace& trace, const Metadata& meta) {
  std::ofstream out = open_out(path);
  write_meta(out, meta);
  out << "# columns: t";
  for (Index l = 0; l < trace.n_coils(); ++l) out << ",u" << (l + 1);
  out << '\n';
  for (Index k = 0; k < trace.n_samples(); ++k) {
    out << format_double(trace.t[k]);
    for (Index l = 0; l < trace.n_coils(); ++l) out << ',' << format_double(trace.u(k, l));
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

SignalTrace read_signal_csv(const std::filesystem::path& path, Metadata* meta) {
  const CsvContent c = read_csv(path);
  if (c.rows.empty() || c.rows.front().size() < 2) throw Error(ErrorKind::io, "signal CSV has no coil columns: " + path.string());
  SignalTrace tr;
  const Index n = static_cast<Index>(c.rows.size());
  const Index L = c.rows.front().size() - 1;
  tr.t.resize(n);
  tr.u.resize(n, L);
  for (Index k = 0; k < n; ++k) {
    const Vector& r = c.rows[static_cast<std::size_t>(k)];
    tr.t[k] = r[0];
    tr.u.row(k) = r.tail(L).transpose();
  }
  if (meta) *meta = c.meta;
  return tr;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::string format_list(const std::vector<double>& v) {
  if (v.empty()) return "default";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_double(v[i]);
  }
  return s;
}

std::string format_coils(const std::vector<Vec2>& coils) {
  std::string s;
  for (std::size_t i = 0; i < coils.size(); ++i) {
    if (i) s += "; ";
    s += format_double(coils[i].x()) + ' ' + format_double(coils[i].y());
  }
  return s;
}

std::string format_shapes(const std::vector<Shape>& shapes) {
  if (shapes.empty()) return "default";
  std::string s;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (i) s += "; ";
    if (const auto* d = std::get_if<Disk>(&shapes[i])) {
      s += "disk " + format_double(d->center.x()) + ' ' + format_double(d->center.y()) + ' ' +
           format_double(d->radius) + ' ' + format_double(d->value);
    } else {
      const auto& q = std::get<Square>(shapes[i]);
      s += "square " + format_double(q.center.x()) + ' ' + format_double(q.center.y()) + ' ' +
           format_double(q.side) + ' ' + format_double(q.value);
    }
  }
  return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorKind::config, "invalid value '" + value + "' for " + key);
}

double to_double(const std::string& key, const std::string& value) {
  double x;
  if (!parse_number(value, x)) bad_value(key, value);
  return x;
}

int to_int(const std::string& key, const std::string& value) {
  const double x = to_double(key, value);
  if (x != std::floor(x) || std::abs(x) > 1e9) bad_value(key, value);
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  const std::string t = trim(value);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) bad_value(key, value);
  errno = 0;
  const unsigned long long x = std::strtoull(t.c_str(), nullptr, 10);
  if (errno) bad_value(key, value);
  return x;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value);
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  if (value == "default") return {};
  std::vector<double> out;
  for (const auto& w : split_ws(value)) out.push_back(to_double(key, w));
  if (out.empty()) bad_value(key, value);
  return out;
}

std::vector<Vec2> to_coils(const std::string& key, const std::string& value) {
  std::vector<Vec2> out;
  for (const auto& item : split(value, ';')) {
    const auto w = split_ws(item);
    if (w.size() != 2) bad_value(key, value);
    out.emplace_back(to_double(key, w[0]), to_double(key, w[1]));
  }
  if (out.empty()) bad_value(key, value);
  return out;
}

std::vector<Shape> to_shapes(const std::string& key, const std::string& value) {
  if (value == "default") return {};
  std::vector<Shape> out;
  for (const auto& item : split(value, ';')) {
    const auto w = split_ws(item);
    if (w.size() != 5) bad_value(key, value);
    const Vec2 center(to_double(key, w[1]), to_double(key, w[2]));
    const double size = to_double(key, w[3]), val = to_double(key, w[4]);
    if (w[0] == "disk") out.push_back(Disk{center, size, val});
    else if (w[0] == "square") out.push_back(Square{center, size, val});
    else bad_value(key, value);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"scanner.gradient", [](RunConfig& c, auto& k, auto& v) { c.scanner.gradient = to_double(k, v); }},
      {"scanner.drive_amplitude", [](RunConfig& c, auto& k, auto& v) { c.scanner.drive_amplitude = to_double(k, v); }},
      {"scanner.f_drive", [](RunConfig& c, auto& k, auto& v) { c.scanner.f_drive = to_double(k, v); }},
      {"scanner.f_rot", [](RunConfig& c, auto& k, auto& v) { c.scanner.f_rot = to_double(k, v); }},
      {"scanner.f_sample", [](RunConfig& c, auto& k, auto& v) { c.scanner.f_sample = to_double(k, v); }},
      {"scanner.coils", [](RunConfig& c, auto& k, auto& v) { c.scanner.coils = to_coils(k, v); }},
      {"scanner.mode",
       [](RunConfig& c, auto& k, auto& v) {
         if (v == "sequential") c.scanner.mode = RotationMode::sequential;
         else if (v == "simultaneous") c.scanner.mode = RotationMode::simultaneous;
         else bad_value(k, v);
       }},
      {"scanner.n_angles", [](RunConfig& c, auto& k, auto& v) { c.scanner.n_angles = to_int(k, v); }},
      {"scanner.total_time", [](RunConfig& c, auto& k, auto& v) { c.scanner.total_time = to_double(k, v); }},
      {"scanner.s_samples", [](RunConfig& c, auto& k, auto& v) { c.scanner.s_samples = to_int(k, v); }},
      {"tracer.core_diameter", [](RunConfig& c, auto& k, auto& v) { c.tracer.core_diameter = to_double(k, v); }},
      {"tracer.saturation_magnetization",
       [](RunConfig& c, auto& k, auto& v) { c.tracer.saturation_magnetization = to_double(k, v); }},
      {"tracer.temperature", [](RunConfig& c, auto& k, auto& v) { c.tracer.constants.temperature = to_double(k, v); }},
      {"tracer.concentration", [](RunConfig& c, auto& k, auto& v) { c.tracer.concentration = to_double(k, v); }},
      {"tracer.density", [](RunConfig& c, auto& k, auto& v) { c.tracer.magnetite_density = to_double(k, v); }},
      {"tracer.molar_mass", [](RunConfig& c, auto& k, auto& v) { c.tracer.magnetite_molar_mass = to_double(k, v); }},
      {"phantom.shapes", [](RunConfig& c, auto& k, auto& v) { c.phantom.shapes = to_shapes(k, v); }},
      {"phantom.supersample", [](RunConfig& c, auto& k, auto& v) { c.phantom.supersample = to_int(k, v); }},
      {"simulation.grid", [](RunConfig& c, auto& k, auto& v) { c.simulation.grid = to_int(k, v); }},
      {"simulation.noise_percent", [](RunConfig& c, auto& k, auto& v) { c.simulation.noise_percent = to_double(k, v); }},
      {"simulation.seed", [](RunConfig& c, auto& k, auto& v) { c.simulation.seed = to_u64(k, v); }},
      {"simulation.forward",
       [](RunConfig& c, auto& k, auto& v) {
         if (v == "direct") c.simulation.factorized = false;
         else if (v == "factorized") c.simulation.factorized = true;
         else bad_value(k, v);
       }},
      {"simulation.subsamples", [](RunConfig& c, auto& k, auto& v) { c.simulation.subsamples = to_int(k, v); }},
      {"reconstruction.method", [](RunConfig& c, auto&, auto& v) { c.reconstruction.method = parse_method(v); }},
      {"reconstruction.grid", [](RunConfig& c, auto& k, auto& v) { c.reconstruction.grid = to_int(k, v); }},
      {"reconstruction.alpha1", [](RunConfig& c, auto& k, auto& v) { c.reconstruction.alpha1 = to_double(k, v); }},
      {"reconstruction.alpha2", [](RunConfig& c, auto& k, auto& v) { c.reconstruction.alpha2 = to_double(k, v); }},
      {"reconstruction.sweep", [](RunConfig& c, auto& k, auto& v) { c.reconstruction.sweep = to_bool(k, v); }},
      {"reconstruction.alpha1_grid", [](RunConfig& c, auto& k, auto& v) { c.reconstruction.alpha1_grid = to_list(k, v); }},
      {"reconstruction.alpha2_grid", [](RunConfig& c, auto& k, auto& v) { c.reconstruction.alpha2_grid = to_list(k, v); }},
      {"reconstruction.max_iterations",
       [](RunConfig& c, auto& k, auto& v) { c.reconstruction.controls.max_iterations = to_int(k, v); }},
      {"reconstruction.tolerance", [](RunConfig& c, auto& k, auto& v) { c.reconstruction.controls.tolerance = to_double(k, v); }},
      {"reconstruction.primal_weight",
       [](RunConfig& c, auto& k, auto& v) { c.reconstruction.controls.primal_weight = to_double(k, v); }},
      {"reconstruction.power_iterations",
       [](RunConfig& c, auto& k, auto& v) { c.reconstruction.controls.power_iterations = to_int(k, v); }},
      {"reconstruction.signal", [](RunConfig& c, auto&, auto& v) { c.reconstruction.signal = v; }},
      {"output.dir", [](RunConfig& c, auto&, auto& v) { c.output_dir = v; }},
      {"output.jobs", [](RunConfig& c, auto& k, auto& v) { c.jobs = to_int(k, v); }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorKind::config, msg);
  };
  try {
    scanner.validate();
    tracer.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::config, e.what());
  }
  require(phantom.supersample >= 1, "phantom.supersample must be >= 1");
  require(simulation.grid >= 2, "simulation.grid must be >= 2");
  require(simulation.noise_percent >= 0, "simulation.noise_percent must be >= 0");
  require(simulation.subsamples >= 1, "simulation.subsamples must be >= 1");
  require(reconstruction.grid >= 2, "reconstruction.grid must be >= 2");
  require(reconstruction.alpha1 > 0 && reconstruction.alpha2 > 0, "alpha values must be positive");
  for (double a : reconstruction.alpha1_grid) require(a > 0, "alpha1_grid values must be positive");
  for (double a : reconstruction.alpha2_grid) require(a > 0, "alpha2_grid values must be positive");
  require(reconstruction.controls.max_iterations >= 1, "reconstruction.max_iterations must be >= 1");
  require(reconstruction.controls.tolerance >= 0, "reconstruction.tolerance must be >= 0");
  require(reconstruction.controls.primal_weight > 0, "reconstruction.primal_weight must be positive");
  require(!output_dir.empty(), "output.dir must not be empty");
}

std::string RunConfig::canonical() const {
  std::ostringstream o;
  auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << '\n'; };
  auto kd = [&](const char* k, double v) { kv(k, format_double(v)); };
  kd("scanner.gradient", scanner.gradient);
  kd("scanner.drive_amplitude", scanner.drive_amplitude);
  kd("scanner.f_drive", scanner.f_drive);
  kd("scanner.f_rot", scanner.f_rot);
  kd("scanner.f_sample", scanner.f_sample);
  kv("scanner.coils", format_coils(scanner.coils));
  kv("scanner.mode", to_string(scanner.mode));
  kd("scanner.n_angles", scanner.n_angles);
  kd("scanner.total_time", scanner.total_time);
  kd("scanner.s_samples", scanner.s_samples);
  kd("tracer.core_diameter", tracer.core_diameter);
  kd("tracer.saturation_magnetization", tracer.saturation_magnetization);
  kd("tracer.temperature", tracer.constants.temperature);
  kd("tracer.concentration", tracer.concentration);
  kd("tracer.density", tracer.magnetite_density);
  kd("tracer.molar_mass", tracer.magnetite_molar_mass);
  kv("phantom.shapes", format_shapes(phantom.shapes));
  kd("phantom.supersample", phantom.supersample);
  kd("simulation.grid", simulation.grid);
  kd("simulation.noise_percent", simulation.noise_percent);
  kv("simulation.seed", std::to_string(simulation.seed));
  kv("simulation.forward", simulation.factorized ? "factorized" : "direct");
  kd("simulation.subsamples", simulation.subsamples);
  kv("reconstruction.method", to_string(reconstruction.method));
  kd("reconstruction.grid", reconstruction.grid);
  kd("reconstruction.alpha1", reconstruction.alpha1);
  kd("reconstruction.alpha2", reconstruction.alpha2);
  kv("reconstruction.sweep", reconstruction.sweep ? "true" : "false");
  kv("reconstruction.alpha1_grid", format_list(reconstruction.alpha1_grid));
  kv("reconstruction.alpha2_grid", format_list(reconstruction.alpha2_grid));
  kd("reconstruction.max_iterations", reconstruction.controls.max_iterations);
  kd("reconstruction.tolerance", reconstruction.controls.tolerance);
  kd("reconstruction.primal_weight", reconstruction.controls.primal_weight);
  kd("reconstruction.power_iterations", reconstruction.controls.power_iterations);
  kv("reconstruction.signal", reconstruction.signal);
  return o.str();
}

std::string RunConfig::hash() const {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
  return buf;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::config, "line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw Error(ErrorKind::config, "line " + std::to_string(number) + ": unknown key " + key);
    it->second(config, key, value);
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

}  // namespace fflmpi
