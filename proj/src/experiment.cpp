#include "fbpghi/experiment.hpp"

#include "fbpghi/filterbank.hpp"
#include "fbpghi/heapint.hpp"
#include "fbpghi/metrics.hpp"
#include "fbpghi/presets.hpp"
#include "spec_json.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace fbpghi {

namespace {

using detail::Json;

// ---------------------------------------------------------------------------
// Config parsing

std::optional<int> preset_index(std::string_view name) {
  if (name.size() == 3 && (name[0] == 'F' || name[0] == 'f') && (name[1] == 'B' || name[1] == 'b') &&
      name[2] >= '1' && name[2] <= '5')
    return name[2] - '0';
  return std::nullopt;
}

template <class T>
T get_as(const Json& j, const char* key, std::string_view where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(std::string(where) + ": bad value for \"" + key + "\"");
  }
}

NamedSignal parse_signal(const Json& j) {
  NamedSignal out;
  if (j.is_string()) {
    const auto kind = parse_signal_kind(j.get<std::string>());
    if (!kind || *kind == SignalKind::wav)
      throw DataError("signals: unknown signal " + j.dump() + " (use s1, s2, s3 or an object)");
    out.spec.kind = *kind;
    out.name = j.get<std::string>();
  } else {
    detail::reject_unknown_keys(j, {"name", "kind", "duration", "sample_rate", "seed", "path"}, "signals");
    if (!j.contains("kind")) throw DataError("signals: missing \"kind\"");
    const auto kind = parse_signal_kind(get_as<std::string>(j, "kind", "signals"));
    if (!kind) throw DataError("signals: unknown kind " + j.at("kind").dump());
    out.spec.kind = *kind;
    if (j.contains("duration")) out.spec.duration = get_as<double>(j, "duration", "signals");
    if (j.contains("sample_rate")) out.spec.sample_rate = get_as<double>(j, "sample_rate", "signals");
    if (j.contains("seed")) out.spec.seed = get_as<std::uint64_t>(j, "seed", "signals");
    if (j.contains("path")) out.spec.path = get_as<std::string>(j, "path", "signals");
    if (j.contains("name")) {
      out.name = get_as<std::string>(j, "name", "signals");
    } else {
      out.name = *kind == SignalKind::wav ? std::filesystem::path(out.spec.path).stem().string()
                                          : std::string(to_string(*kind));
    }
  }
  try {
    validate(out.spec);
  } catch (const ParameterError& e) {
    throw DataError(std::string("signals: ") + e.what());
  }
  return out;
}

NamedFilterBank parse_filterbank(const Json& j) {
  NamedFilterBank out;
  if (j.is_string()) {
    const auto index = preset_index(j.get<std::string>());
    if (!index) throw DataError("filterbanks: unknown preset " + j.dump() + " (use FB1..FB5 or an object)");
    out.name = "FB" + std::to_string(*index);
    out.spec = preset_filterbank(*index);
  } else {
    if (!j.is_object()) throw DataError("filterbanks: expected a string or an object");
    FilterBankSpec base;
    if (j.contains("preset")) {
      const auto index = preset_index(get_as<std::string>(j, "preset", "filterbanks"));
      if (!index) throw DataError("filterbanks: unknown preset " + j.at("preset").dump());
      base = preset_filterbank(*index);
      out.name = "FB" + std::to_string(*index);
    }
    out.spec = detail::filterbank_from_json(j, base, "filterbanks");
    if (j.contains("name")) out.name = get_as<std::string>(j, "name", "filterbanks");
    if (out.name.empty()) throw DataError("filterbanks: custom entries need a \"name\"");
  }
  try {
    validate(out.spec);
  } catch (const Error& e) {
    throw DataError("filterbanks: " + out.name + ": " + e.what());
  }
  return out;
}

MethodSpec parse_method(const Json& j) {
  MethodSpec out;
  std::string name;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else {
    detail::reject_unknown_keys(j, {"method", "tol", "iterations", "alpha"}, "methods");
    if (!j.contains("method")) throw DataError("methods: missing \"method\"");
    name = get_as<std::string>(j, "method", "methods");
    if (j.contains("tol")) out.tol = get_as<double>(j, "tol", "methods");
    if (j.contains("iterations")) out.iterations = get_as<int>(j, "iterations", "methods");
    if (j.contains("alpha")) out.alpha = get_as<double>(j, "alpha", "methods");
  }
  if (name == "fbpghi") {
    out.kind = MethodKind::fbpghi;
  } else if (name == "fgla") {
    out.kind = MethodKind::fgla;
  } else if (name.rfind("fgla@", 0) == 0) {
    out.kind = MethodKind::fgla;
    const char* first = name.data() + 5;
    const char* last = name.data() + name.size();
    const auto [ptr, ec] = std::from_chars(first, last, out.iterations);
    if (ec != std::errc{} || ptr != last) throw DataError("methods: bad iteration count in " + name);
  } else {
    throw DataError("methods: unknown method \"" + name + "\"");
  }
  if (!(out.tol > 0 && out.tol < 1)) throw DataError("methods: tol must lie in (0, 1)");
  if (out.iterations < 1) throw DataError("methods: iterations must be at least 1");
  if (!(out.alpha >= 0 && out.alpha < 1)) throw DataError("methods: alpha must lie in [0, 1)");
  return out;
}

template <class T, class Parse>
std::vector<T> parse_list(const Json& root, const char* key, Parse parse) {
  std::vector<T> out;
  if (!root.contains(key)) return out;
  const Json& list = root.at(key);
  if (!list.is_array()) throw DataError(std::string(key) + ": expected an array");
  for (const Json& item : list) out.push_back(parse(item));
  return out;
}

template <class T, class Name>
void require_unique(const std::vector<T>& items, Name name, const char* what) {
  std::set<std::string> seen;
  for (const T& item : items)
    if (!seen.insert(name(item)).second)
      throw DataError(std::string(what) + ": duplicate entry \"" + name(item) + "\"");
}

// ---------------------------------------------------------------------------
// Running

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence";
  if (dynamic_cast<const DegenerateInputError*>(&e)) return "degenerate_input";
  if (dynamic_cast<const DataError*>(&e)) return "data";
  if (dynamic_cast<const ConfigurationError*>(&e)) return "configuration";
  if (dynamic_cast<const ParameterError*>(&e)) return "parameter";
  return "internal";
}

void record_error(CellResult& cell, const std::exception& e) {
  cell.error_kind = error_kind(e);
  cell.error = e.what();
  cell.spectral_difference_db.reset();
  cell.trace.clear();
  cell.phase_difference.resize(0, 0);
}

// Analysis shared by all methods and seeds of one (signal, filter bank) pair.
struct Prepared {
  std::unique_ptr<FilterBank> fb;
  ComplexGrid c;
};

Prepared prepare(const RealSignal& s, const FilterBankSpec& spec) {
  if (s.sample_rate != spec.sample_rate)
    throw ConfigurationError("signal sample rate " + std::to_string(s.sample_rate) +
                             " Hz does not match filter bank sample rate " +
                             std::to_string(spec.sample_rate) + " Hz");
  validate(spec);
  const Index length = padded_length(s.length(), spec.decimation);
  Prepared p;
  p.fb = std::make_unique<FilterBank>(build_filterbank(spec, length));
  p.c = analyze(*p.fb, zero_pad(s, length));
  return p;
}

void run_method(CellResult& cell, const Prepared& p, const MethodSpec& method, bool keep_phase_maps) {
  const MagnitudeGrid m = p.c.abs();
  if (method.kind == MethodKind::fbpghi) {
    ReconstructOptions options;
    options.tol = method.tol;
    options.seed = cell.seed;
    const RealSignal out = reconstruct(m, *p.fb, options);
    const ComplexGrid c_out = analyze(*p.fb, out);
    cell.spectral_difference_db = spectral_difference(p.c, c_out);
    if (keep_phase_maps) cell.phase_difference = phase_difference_map(p.c.arg(), c_out.arg());
  } else {
    FglaOptions options;
    options.iterations = method.iterations;
    options.alpha = method.alpha;
    options.seed = cell.seed;
    const FglaResult r = fgla(m, *p.fb, options);
    cell.trace = r.trace.values;
    cell.spectral_difference_db = r.trace.values.back();
  }
}

// ---------------------------------------------------------------------------
// Output

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string file_safe(std::string_view name) {
  std::string out;
  for (char ch : name) {
    const bool keep = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                      ch == '-' || ch == '_' || ch == '.';
    out.push_back(keep ? ch : '_');
  }
  return out;
}

std::string cell_stem(const CellResult& cell) {
  return file_safe(cell.signal) + "_" + file_safe(cell.filterbank) + "_" + file_safe(cell.method) +
         "_seed" + std::to_string(cell.seed);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace

std::string MethodSpec::label() const {
  return kind == MethodKind::fbpghi ? std::string("fbpghi") : "fgla@" + std::to_string(iterations);
}

ExperimentConfig parse_config(std::string_view json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("config is not valid JSON: ") + e.what());
  }
  detail::reject_unknown_keys(root, {"signals", "filterbanks", "methods", "seeds", "output_dir"}, "config");

  ExperimentConfig config;
  config.signals = parse_list<NamedSignal>(root, "signals", parse_signal);
  config.filterbanks = parse_list<NamedFilterBank>(root, "filterbanks", parse_filterbank);
  config.methods = parse_list<MethodSpec>(root, "methods", parse_method);
  if (root.contains("seeds"))
    config.seeds = parse_list<std::uint64_t>(root, "seeds", [](const Json& j) {
      if (!j.is_number_unsigned()) throw DataError("seeds: expected nonnegative integers");
      return j.get<std::uint64_t>();
    });
  if (root.contains("output_dir")) config.output_dir = get_as<std::string>(root, "output_dir", "config");

  require_unique(config.signals, [](const NamedSignal& s) { return s.name; }, "signals");
  require_unique(config.filterbanks, [](const NamedFilterBank& f) { return f.name; }, "filterbanks");
  require_unique(config.methods, [](const MethodSpec& m) { return m.label(); }, "methods");
  require_unique(config.seeds, [](std::uint64_t s) { return std::to_string(s); }, "seeds");
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

EvalReport run_experiment(const ExperimentConfig& config, const ExperimentOptions& options) {
  using Clock = std::chrono::steady_clock;
  EvalReport report;
  for (const NamedSignal& signal : config.signals) {
    std::optional<RealSignal> s;
    std::string signal_error_kind, signal_error;
    try {
      s = gen_signal(signal.spec);
    } catch (const std::exception& e) {
      signal_error_kind = error_kind(e);
      signal_error = e.what();
    }
    for (const NamedFilterBank& bank : config.filterbanks) {
      std::optional<Prepared> prepared;
      std::string bank_error_kind = signal_error_kind, bank_error = signal_error;
      if (s) {
        try {
          prepared = prepare(*s, bank.spec);
        } catch (const std::exception& e) {
          bank_error_kind = error_kind(e);
          bank_error = e.what();
        }
      }
      for (const MethodSpec& method : config.methods) {
        for (std::uint64_t seed : config.seeds) {
          CellResult cell;
          cell.signal = signal.name;
          cell.filterbank = bank.name;
          cell.method = method.label();
          cell.seed = seed;
          if (prepared) {
            cell.channels = prepared->fb->channels();
            cell.decimation = prepared->fb->decimation();
            cell.length = prepared->fb->length();
            cell.redundancy = redundancy(*prepared->fb);
            const auto start = Clock::now();
            try {
              run_method(cell, *prepared, method, options.keep_phase_maps);
            } catch (const std::exception& e) {
              record_error(cell, e);
            }
            cell.runtime_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
          } else {
            cell.error_kind = bank_error_kind;
            cell.error = bank_error;
          }
          if (options.progress) options.progress(cell);
          report.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return report;
}

std::string report_json(const EvalReport& report) {
  Json cells = Json::array();
  for (const CellResult& cell : report.cells) {
    Json j{{"signal", cell.signal},
           {"filterbank", cell.filterbank},
           {"method", cell.method},
           {"seed", cell.seed},
           {"channels", cell.channels},
           {"decimation", cell.decimation},
           {"length", cell.length},
           {"redundancy", cell.redundancy},
           {"spectral_difference_db", nullptr},
           {"status", cell.ok() ? "ok" : "error"}};
    if (cell.spectral_difference_db) j["spectral_difference_db"] = *cell.spectral_difference_db;
    if (!cell.ok()) {
      j["error_kind"] = cell.error_kind;
      j["error"] = cell.error;
    }
    if (!cell.trace.empty()) j["trace_db"] = cell.trace;
    cells.push_back(std::move(j));
  }
  const Json root{{"format", "fbpghi-eval-report"}, {"version", 1}, {"cells", std::move(cells)}};
  return root.dump(2) + "\n";
}

std::string timings_json(const EvalReport& report) {
  Json cells = Json::array();
  for (const CellResult& cell : report.cells)
    cells.push_back({{"signal", cell.signal},
                     {"filterbank", cell.filterbank},
                     {"method", cell.method},
                     {"seed", cell.seed},
                     {"runtime_ms", cell.runtime_ms}});
  return Json{{"cells", std::move(cells)}}.dump(2) + "\n";
}

std::string grid_csv(const RealGrid& grid) {
  std::string out;
  for (Index n = 0; n < grid.rows(); ++n) {
    for (Index k = 0; k < grid.cols(); ++k) {
      if (k) out.push_back(',');
      out += format_number(grid(n, k));
    }
    out.push_back('\n');
  }
  return out;
}

std::string phase_map_pgm(const RealGrid& map) {
  const Index width = map.rows(), height = map.cols();
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(width * height));
  for (Index row = 0; row < height; ++row) {
    const Index k = height - 1 - row;
    for (Index n = 0; n < width; ++n) {
      const double v = std::clamp(map(n, k), -1.0, 1.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround((v + 1.0) * 127.5))));
    }
  }
  return out;
}

void write_artifacts(const std::filesystem::path& dir, const EvalReport& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "report.json", report_json(report));
  write_text(dir / "timings.json", timings_json(report));

  std::string summary = "signal,filterbank,method,seed,channels,decimation,redundancy,spectral_difference_db,status\n";
  for (const CellResult& cell : report.cells) {
    summary += cell.signal + "," + cell.filterbank + "," + cell.method + "," + std::to_string(cell.seed) +
               "," + std::to_string(cell.channels) + "," + std::to_string(cell.decimation) + "," +
               format_number(cell.redundancy) + "," +
               (cell.spectral_difference_db ? format_number(*cell.spectral_difference_db) : "") + "," +
               (cell.ok() ? "ok" : cell.error_kind) + "\n";
    if (cell.phase_difference.size() > 0) {
      write_text(dir / (cell_stem(cell) + "_phase_diff.csv"), grid_csv(cell.phase_difference));
      write_text(dir / (cell_stem(cell) + "_phase_diff.pgm"), phase_map_pgm(cell.phase_difference));
    }
    if (!cell.trace.empty()) {
      std::string trace = "iteration,spectral_difference_db\n";
      for (std::size_t i = 0; i < cell.trace.size(); ++i)
        trace += std::to_string(i + 1) + "," + format_number(cell.trace[i]) + "\n";
      write_text(dir / (cell_stem(cell) + "_trace.csv"), trace);
    }
  }
  write_text(dir / "summary.csv", summary);
}

CompareResult compare_methods(const RealSignal& s, const FilterBankSpec& spec, const CompareOptions& options) {
  validate(s);
  const Prepared p = prepare(s, spec);
  const MagnitudeGrid m = p.c.abs();

  ReconstructOptions ro;
  ro.tol = options.tol;
  ro.seed = options.seed;
  CompareResult result;
  result.fbpghi_db = spectral_difference(p.c, analyze(*p.fb, reconstruct(m, *p.fb, ro)));

  FglaOptions fo;
  fo.iterations = options.iterations;
  fo.alpha = options.alpha;
  fo.seed = options.seed;
  result.trace = fgla(m, *p.fb, fo).trace;
  for (std::size_t i = 0; i < result.trace.values.size(); ++i)
    if (result.trace.values[i] <= result.fbpghi_db) {
      result.crossing = static_cast<int>(i + 1);
      break;
    }
  return result;
}

std::string compare_csv(const CompareResult& result) {
  std::string out = "iteration,fgla_db,fbpghi_db\n";
  for (std::size_t i = 0; i < result.trace.values.size(); ++i)
    out += std::to_string(i + 1) + "," + format_number(result.trace.values[i]) + "," +
           format_number(result.fbpghi_db) + "\n";
  return out;
}

}  // namespace fbpghi
