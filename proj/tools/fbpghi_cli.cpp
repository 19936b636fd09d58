#include "fbpghi/coef_io.hpp"
#include "fbpghi/experiment.hpp"
#include "fbpghi/fgla.hpp"
#include "fbpghi/filterbank.hpp"
#include "fbpghi/heapint.hpp"
#include "fbpghi/metrics.hpp"
#include "fbpghi/presets.hpp"
#include "fbpghi/signals.hpp"
#include "fbpghi/wav.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

using namespace fbpghi;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct FilterBankFlags {
  std::string preset = "FB2";
  std::string scale;
  double bins = 0, bw = 0, fmin = -1, fmax = -1;
  Index decimation = 0;
  CLI::App* owner = nullptr;

  void attach(CLI::App* app) {
    owner = app;
    app->add_option("--preset", preset, "Base configuration FB1..FB5")->capture_default_str();
    app->add_option("--fb-scale", scale, "erb, logq, sqrt4, quart or linear");
    app->add_option("--bins", bins, "Channels per scale unit")->check(CLI::PositiveNumber);
    app->add_option("--bw", bw, "Bandwidth in scale units")->check(CLI::PositiveNumber);
    app->add_option("--fmin", fmin, "Lowest center frequency (Hz)")->check(CLI::NonNegativeNumber);
    app->add_option("--fmax", fmax, "Highest center frequency (Hz), default Nyquist")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--decimation", decimation, "Hop size a in samples")->check(CLI::PositiveNumber);
  }

  bool any_given() const {
    for (const char* name : {"--preset", "--fb-scale", "--bins", "--bw", "--fmin", "--fmax", "--decimation"})
      if (owner->count(name) > 0) return true;
    return false;
  }

  FilterBankSpec resolve(double sample_rate) const {
    if (preset.size() != 3 || (preset.rfind("FB", 0) != 0 && preset.rfind("fb", 0) != 0) ||
        preset[2] < '1' || preset[2] > '5')
      throw ParameterError("--preset must be FB1..FB5");
    FilterBankSpec spec = preset_filterbank(preset[2] - '0', sample_rate);
    if (!scale.empty()) {
      const auto kind = parse_scale_kind(scale);
      if (!kind) throw ParameterError("unknown --fb-scale " + scale);
      spec.scale.kind = *kind;
      // The logq presets start at 30 Hz; other scales default to 0 Hz.
      if (fmin < 0) spec.fmin = *kind == ScaleKind::log10q ? 30.0 : 0.0;
    }
    if (bins > 0) spec.bins = bins;
    if (bw > 0) spec.bw = bw;
    if (fmin >= 0) spec.fmin = fmin;
    if (fmax >= 0) spec.fmax = fmax;
    if (decimation > 0) spec.decimation = decimation;
    validate(spec);
    return spec;
  }
};

struct MethodFlags {
  std::string method = "fbpghi";
  double tol = 1e-7;
  std::uint64_t seed = 0;
  int iterations = 100;
  double alpha = 0.99;

  void attach(CLI::App* app, bool with_method) {
    if (with_method)
      app->add_option("--method", method, "fbpghi or fgla")
          ->check(CLI::IsMember({"fbpghi", "fgla"}))
          ->capture_default_str();
    app->add_option("--tol", tol, "Relative magnitude threshold for heap integration")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--seed", seed, "Seed for random phases")->capture_default_str();
    app->add_option("--iterations", iterations, "fGLA iterations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--alpha", alpha, "fGLA momentum in [0, 1)")->capture_default_str();
  }
};

RealSignal trimmed(const RealSignal& s, Index length) {
  return RealSignal{s.samples.head(std::min(length, s.length())), s.sample_rate};
}

void print_db(const char* what, double db) { std::printf("%s: %.2f dB\n", what, db); }

int cmd_analyze(const std::string& input, const std::string& output, const FilterBankFlags& fbf,
                bool with_phase) {
  const RealSignal s = read_wav(input);
  const FilterBankSpec spec = fbf.resolve(s.sample_rate);
  const Index length = padded_length(s.length(), spec.decimation);
  const FilterBank fb = build_filterbank(spec, length);
  const ComplexGrid c = analyze(fb, zero_pad(s, length));

  CoefficientFile file;
  file.spec = spec;
  file.length = length;
  file.signal_length = s.length();
  file.magnitude = c.abs();
  if (with_phase) file.phase = PhaseGrid(c.arg());
  write_coefficients(output, file);
  std::printf("%s: %lld frames x %lld channels, a = %lld, R = %.2f\n", output.c_str(),
              static_cast<long long>(fb.frames()), static_cast<long long>(fb.channels()),
              static_cast<long long>(fb.decimation()), redundancy(fb));
  return kOk;
}

int cmd_reconstruct(const std::string& input, const std::string& output, const FilterBankFlags& fbf,
                    const MethodFlags& mf) {
  FilterBankSpec spec;
  MagnitudeGrid m;
  Index length = 0, signal_length = 0;
  if (std::filesystem::path(input).extension() == ".fbc") {
    CoefficientFile file = read_coefficients(input);
    if (fbf.any_given()) warn("filter bank flags are ignored for coefficient input");
    spec = file.spec;
    length = file.length;
    signal_length = file.signal_length;
    m = std::move(file.magnitude);
  } else {
    const RealSignal s = read_wav(input);
    spec = fbf.resolve(s.sample_rate);
    length = padded_length(s.length(), spec.decimation);
    signal_length = s.length();
    m = analyze(build_filterbank(spec, length), zero_pad(s, length)).abs();
  }
  const FilterBank fb = build_filterbank(spec, length);
  if (m.rows() != fb.frames() || m.cols() != fb.channels())
    throw DataError(input + ": coefficient grid does not match its filter bank");

  RealSignal out;
  if (mf.method == "fgla") {
    FglaOptions options;
    options.iterations = mf.iterations;
    options.alpha = mf.alpha;
    options.seed = mf.seed;
    options.record_trace = false;
    out = fgla(m, fb, options).signal;
  } else {
    ReconstructOptions options;
    options.tol = mf.tol;
    options.seed = mf.seed;
    out = reconstruct(m, fb, options);
  }
  if (m.maxCoeff() > 0) print_db("spectral difference", spectral_difference(m, MagnitudeGrid(analyze(fb, out).abs())));
  write_wav(output, trimmed(out, signal_length));
  std::printf("wrote %s\n", output.c_str());
  return kOk;
}

int cmd_evaluate(const std::string& config_path, const std::string& output_dir, bool quiet) {
  ExperimentConfig config = load_config(config_path);
  if (!output_dir.empty()) config.output_dir = output_dir;

  ExperimentOptions options;
  options.keep_phase_maps = !config.output_dir.empty();
  if (!quiet)
    options.progress = [](const CellResult& cell) {
      if (cell.ok())
        std::printf("%-8s %-8s %-10s seed %-4llu %8.2f dB  (%.0f ms)\n", cell.signal.c_str(),
                    cell.filterbank.c_str(), cell.method.c_str(), static_cast<unsigned long long>(cell.seed),
                    *cell.spectral_difference_db, cell.runtime_ms);
      else
        std::printf("%-8s %-8s %-10s seed %-4llu %s error: %s\n", cell.signal.c_str(), cell.filterbank.c_str(),
                    cell.method.c_str(), static_cast<unsigned long long>(cell.seed), cell.error_kind.c_str(),
                    cell.error.c_str());
      std::fflush(stdout);
    };
  const EvalReport report = run_experiment(config, options);
  if (config.output_dir.empty())
    std::cout << report_json(report);
  else
    write_artifacts(config.output_dir, report);

  bool convergence = false, failed = false;
  for (const CellResult& cell : report.cells) {
    failed = failed || !cell.ok();
    convergence = convergence || cell.error_kind == "convergence";
  }
  if (convergence) return kNumerical;
  return failed ? kData : kOk;
}

int cmd_compare(const std::string& signal, double duration, std::uint64_t signal_seed,
                const FilterBankFlags& fbf, const MethodFlags& mf, const std::string& output) {
  SignalSpec ss;
  if (const auto kind = parse_signal_kind(signal); kind && *kind != SignalKind::wav) {
    ss.kind = *kind;
    ss.duration = duration;
    ss.seed = signal_seed;
  } else {
    ss.kind = SignalKind::wav;
    ss.path = signal;
  }
  const RealSignal s = gen_signal(ss);
  CompareOptions options;
  options.tol = mf.tol;
  options.iterations = mf.iterations;
  options.alpha = mf.alpha;
  options.seed = mf.seed;
  const CompareResult r = compare_methods(s, fbf.resolve(s.sample_rate), options);

  const std::string csv = compare_csv(r);
  if (output.empty() || output == "-") {
    std::cout << csv;
  } else {
    std::ofstream out(output, std::ios::binary);
    if (!(out << csv)) throw DataError("cannot write " + output);
  }
  std::fprintf(stderr, "fbpghi: %.2f dB, fgla after %d iterations: %.2f dB\n", r.fbpghi_db,
               r.trace.iterations, r.trace.values.back());
  if (r.crossing)
    std::fprintf(stderr, "fgla reaches fbpghi at iteration %d\n", *r.crossing);
  else
    std::fprintf(stderr, "fgla does not reach fbpghi within %d iterations\n", r.trace.iterations);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase retrieval for Gaussian filter banks by phase-gradient heap integration"};
  app.require_subcommand(1);

  std::string input, output;
  bool with_phase = false, quiet = false;
  FilterBankFlags analyze_fb, reconstruct_fb, compare_fb;
  MethodFlags reconstruct_m, compare_m;

  auto* analyze_cmd = app.add_subcommand("analyze", "WAV to coefficient file (.fbc)");
  analyze_cmd->add_option("input", input, "Input WAV")->required();
  analyze_cmd->add_option("-o,--output", output, "Output .fbc file")->required();
  analyze_cmd->add_flag("--with-phase", with_phase, "Store phases as well as magnitudes");
  analyze_fb.attach(analyze_cmd);

  auto* reconstruct_cmd =
      app.add_subcommand("reconstruct", "Magnitudes (.fbc) or WAV to a phase-reconstructed WAV");
  reconstruct_cmd->add_option("input", input, ".fbc or WAV input")->required();
  reconstruct_cmd->add_option("-o,--output", output, "Output WAV (float32)")->required();
  reconstruct_fb.attach(reconstruct_cmd);
  reconstruct_m.attach(reconstruct_cmd, true);

  std::string output_dir;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Run an experiment config, write the report");
  evaluate_cmd->add_option("config", input, "Config JSON")->required();
  evaluate_cmd->add_option("-o,--output-dir", output_dir, "Overrides output_dir from the config");
  evaluate_cmd->add_flag("-q,--quiet", quiet, "No per-cell progress");

  std::string signal = "s1";
  double duration = 1.0;
  std::uint64_t signal_seed = 1;
  auto* compare_cmd = app.add_subcommand("compare", "fGLA convergence trace against FBPGHI as CSV");
  compare_cmd->add_option("--signal", signal, "s1, s2, s3 or a WAV path")->capture_default_str();
  compare_cmd->add_option("--duration", duration, "Synthetic signal length (s)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  compare_cmd->add_option("--signal-seed", signal_seed, "Noise seed for s3")->capture_default_str();
  compare_cmd->add_option("-o,--output", output, "Output CSV, default stdout");
  compare_fb.attach(compare_cmd);
  compare_m.attach(compare_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*analyze_cmd) return cmd_analyze(input, output, analyze_fb, with_phase);
    if (*reconstruct_cmd) {
      if (!(reconstruct_m.alpha >= 0 && reconstruct_m.alpha < 1))
        throw ParameterError("--alpha must lie in [0, 1)");
      return cmd_reconstruct(input, output, reconstruct_fb, reconstruct_m);
    }
    if (*evaluate_cmd) return cmd_evaluate(input, output_dir, quiet);
    if (*compare_cmd) {
      if (!(compare_m.alpha >= 0 && compare_m.alpha < 1)) throw ParameterError("--alpha must lie in [0, 1)");
      return cmd_compare(signal, duration, signal_seed, compare_fb, compare_m, output);
    }
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumerical;
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const ConfigurationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  }
  return kUsage;
}
