// Command-line front end: filter synthesis, sensing, correlation, features,
// classification, localization and the evaluation harness.

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "smash/codec.hpp"
#include "smash/error.hpp"
#include "smash/eval.hpp"
#include "smash/inference.hpp"
#include "smash/localization.hpp"
#include "smash/mach.hpp"
#include "smash/rng.hpp"
#include "smash/sensing.hpp"
#include "smash/stsf.hpp"
#include "smash/synthetic.hpp"
#include "smash/view.hpp"

namespace fs = std::filesystem;
using namespace smash;

namespace {

// Bad option values that CLI11 cannot catch on its own; exit status 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(s);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string csv_label(const std::string& s) {
  if (s.find_first_of(",\n\r") != std::string::npos)
    throw Error(Errc::format, "label '" + s + "' cannot be written to CSV (contains a comma or newline)");
  return s;
}

// Reads a CSV file into header + rows, dropping blank lines and CR endings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const std::string& context) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(Errc::format, context + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw Error(Errc::format, path.string() + ":" + std::to_string(lineno) + ": expected " +
                                    std::to_string(t.header.size()) + " cells, got " + std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw Error(Errc::format, path.string() + ": empty CSV");
  return t;
}

double to_double(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(Errc::format, context + ": expected a number, got '" + s + "'");
}

std::size_t to_size(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used == s.size() && s.find('-') == std::string::npos) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw Error(Errc::format, context + ": expected a non-negative integer, got '" + s + "'");
}

AffineView parse_view_option(const std::string& text) {
  try {
    return AffineView::parse(text);
  } catch (const Error& e) {
    throw UsageError(std::string("--view: ") + e.what());
  }
}

// --- run bookkeeping ---------------------------------------------------------

// Options every command shares: the seed, the output target and where the
// manifest goes.
struct RunOptions {
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string manifest;
};

void add_run_options(CLI::App* cmd, RunOptions& run, bool out_required, const std::string& out_help) {
  cmd->add_option("--seed", run.seed, "Seed for every random draw (matrix, noise, SVM order)")->capture_default_str();
  auto* o = cmd->add_option("-o,--out", run.out, out_help);
  if (out_required) o->required();
  else o->capture_default_str();
  cmd->add_option("--manifest", run.manifest, "Run manifest path (default: next to the output)");
}

class Run {
 public:
  Run(std::string command, const RunOptions& opts) : command_(std::move(command)), opts_(opts) {
    config.seed = opts.seed;
    config.svm.seed = opts.seed;
  }

  ExperimentConfig config;

  void note(const std::string& key, const std::string& value) { extra_[key] = value; }
  void note(const std::string& key, double value) { extra_[key] = fmt17(value); }

  // Writes text to the output target ("-" is stdout).
  void emit(const std::string& text) const {
    if (opts_.out == "-") {
      std::cout << text;
      std::cout.flush();
    } else {
      write_text_atomic(opts_.out, text);
    }
  }

  void emit(std::span<const std::uint8_t> bytes) const {
    if (opts_.out == "-") {
      std::cout.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      std::cout.flush();
    } else {
      write_file_atomic(opts_.out, bytes);
    }
  }

  void finish() {
    extra_["command"] = command_;
    extra_["seed"] = std::to_string(opts_.seed);
    extra_["output"] = opts_.out;
    std::string path = opts_.manifest;
    if (path.empty()) {
      if (opts_.out == "-") {
        std::string flat = command_;
        std::replace(flat.begin(), flat.end(), ' ', '-');
        path = "smash-" + flat + ".manifest";
      } else if (fs::is_directory(opts_.out)) {
        path = (fs::path(opts_.out) / "manifest.txt").string();
      } else {
        path = opts_.out + ".manifest";
      }
    }
    write_text_atomic(path, manifest_text(config, extra_));
  }

 private:
  std::string command_;
  RunOptions opts_;
  std::map<std::string, std::string> extra_;
};

// --- shared inputs -----------------------------------------------------------

struct MachOptions {
  double alpha = 1.0, beta = 1.0, gamma = 1.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--alpha", alpha, "Noise-term weight")->capture_default_str();
    cmd->add_option("--beta", beta, "Average-energy weight")->capture_default_str();
    cmd->add_option("--gamma", gamma, "Similarity weight")->capture_default_str();
  }
  MachParams params() const {
    MachParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.gamma = gamma;
    return p;
  }
};

struct BankOptions {
  std::string bank;
  std::vector<std::string> filters;

  void add(CLI::App* cmd) {
    cmd->add_option("--bank", bank, "Filter bank (BNK1)");
    cmd->add_option("--filter", filters, "Filter file (MCH1); repeatable, in bank order");
  }
  FilterBank load(Run& run) const {
    if (bank.empty() == filters.empty()) throw UsageError("give exactly one of --bank or --filter");
    if (!bank.empty()) {
      run.note("input.bank", bank);
      return decode_bank(read_file(bank), bank);
    }
    std::vector<MachFilter> fs;
    for (const auto& f : filters) fs.push_back(decode_filter(read_file(f), f));
    run.note("input.filters", [&] {
      std::string s;
      for (const auto& f : filters) s += (s.empty() ? "" : ";") + f;
      return s;
    }());
    return FilterBank::from_filters(std::move(fs));
  }
};

// Where the video comes from and how it is sensed.
struct SourceOptions {
  std::string video;
  std::string compressed;
  std::string matrix;
  double cr = 100.0;
  std::string dist = "gaussian";
  double noise = 0.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--video", video, "Video (.rvf file or PGM directory)");
    cmd->add_option("--compressed", compressed, "Compressed measurements (CMP1)");
    cmd->add_option("--matrix", matrix, "Measurement matrix (PHI1); generated from --seed when absent");
    cmd->add_option("--cr", cr, "Compression ratio D/K; 1 selects the uncompressed oracle path")->capture_default_str();
    cmd->add_option("--dist", dist, "Matrix distribution")->check(CLI::IsMember({"gaussian", "bernoulli"}))->capture_default_str();
    cmd->add_option("--noise", noise, "Measurement noise standard deviation")->capture_default_str();
  }

  void record(Run& run) const {
    run.config.compression_ratio = cr;
    run.config.distribution = parse_distribution(dist);
    run.config.noise_sigma = noise;
    run.config.validate();
  }
};

MeasurementMatrix matrix_for(const SourceOptions& src, const Run& run, std::size_t pixels) {
  if (!src.matrix.empty()) {
    MeasurementMatrix m = decode_matrix(read_file(src.matrix), src.matrix);
    if (m.cols() != pixels)
      throw Error(Errc::dimension, src.matrix + ": matrix has D=" + std::to_string(m.cols()) + " but frames have " +
                                       std::to_string(pixels) + " pixels");
    return m;
  }
  return make_matrix(run.config.distribution, run.config.seed, run.config.measurements(pixels), pixels);
}

struct Prepared {
  std::optional<Correlator> correlator;
  Provenance provenance = Provenance::oracle;
  Dims3 scene;
  std::size_t measurements = 0;
};

Prepared prepare_video(const VideoVolume& v, const SourceOptions& src, const Run& run, std::uint64_t noise_seed,
                       const MeasurementMatrix* shared) {
  Prepared p;
  p.scene = v.dims();
  if (src.matrix.empty() && run.config.oracle()) {
    p.correlator.emplace(temporal_derivative(v));
    return p;
  }
  const MeasurementMatrix local = shared ? MeasurementMatrix{} : matrix_for(src, run, v.dims().frame_size());
  const MeasurementMatrix& m = shared ? *shared : local;
  const CompressedVideo z = compressed_temporal_derivative(compress(v, m, run.config.noise_sigma, noise_seed));
  p.correlator.emplace(backproject(z, m));
  p.provenance = Provenance::smashed;
  p.measurements = m.rows();
  return p;
}

Prepared prepare_source(const SourceOptions& src, Run& run) {
  if (src.video.empty() == src.compressed.empty()) throw UsageError("give exactly one of --video or --compressed");
  src.record(run);
  if (!src.video.empty()) {
    run.note("input.video", src.video);
    if (!src.matrix.empty()) run.note("input.matrix", src.matrix);
    const VideoVolume v = load_video(src.video);
    Prepared p = prepare_video(v, src, run, run.config.seed, nullptr);
    run.note("measurements", std::to_string(p.measurements));
    return p;
  }
  run.note("input.compressed", src.compressed);
  CompressedVideo z = decode_compressed(read_file(src.compressed), src.compressed);
  MeasurementMatrix m = make_matrix(z.distribution, z.matrix_seed, z.measurements_per_frame, z.scene.frame_size());
  if (!src.matrix.empty()) {
    run.note("input.matrix", src.matrix);
    m = decode_matrix(read_file(src.matrix), src.matrix);
  }
  z.check_consistent(m);
  if (z.derivative_order == 0) z = compressed_temporal_derivative(z);
  Prepared p;
  p.scene = z.scene;
  p.correlator.emplace(backproject(z, m));
  p.provenance = Provenance::smashed;
  p.measurements = m.rows();
  run.config.distribution = z.distribution;
  run.config.noise_sigma = z.noise_sigma;
  run.note("matrix_seed_file", std::to_string(z.matrix_seed));
  run.note("measurements", std::to_string(p.measurements));
  return p;
}

std::string feature_header() { return "name,label"; }

std::string feature_row(const std::string& name, const std::string& label, const FeatureVector& fv) {
  std::string row = csv_label(name) + "," + csv_label(label);
  for (double v : fv.values) row += "," + fmt17(v);
  return row + "\n";
}

std::string feature_csv_header(std::size_t bank_size) {
  std::string h = feature_header();
  for (const auto& n : feature_names(bank_size)) h += "," + n;
  return h + "\n";
}

struct Crops {
  std::vector<std::string> specs;

  Crop parse(std::size_t i) const {
    const auto cells = split(specs[i], ',');
    if (cells.size() != 6) throw UsageError("--crop expects row,col,frame,rows,cols,frames");
    std::array<std::size_t, 6> v{};
    for (std::size_t k = 0; k < 6; ++k) {
      try {
        v[k] = to_size(cells[k], "--crop");
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }
    return Crop{v[0], v[1], v[2], Dims3{v[3], v[4], v[5]}};
  }
};

// --- commands ----------------------------------------------------------------

struct FilterBuild {
  RunOptions run;
  MachOptions mach;
  std::vector<std::string> videos;
  Crops crops;
  std::vector<std::string> views;
  std::string corpus;
  std::string label;
  bool raw = false;

  void add(CLI::App* parent) {
    auto* cmd = parent->add_subcommand("build", "Synthesize a MACH filter from training examples");
    add_run_options(cmd, run, true, "Filter output (MCH1)");
    mach.add(cmd);
    cmd->add_option("--example", videos, "Training video (.rvf or PGM directory); repeatable");
    cmd->add_option("--crop", crops.specs, "row,col,frame,rows,cols,frames crop per example; repeatable");
    cmd->add_option("--view", views, "Affine view a11,a12,a21,a22,b1,b2 per example (builds a type-2 filter)");
    cmd->add_option("--corpus", corpus, "Corpus directory; uses the crops of every video labelled --label");
    cmd->add_option("--label", label, "Action label")->required();
    cmd->add_flag("--raw", raw, "Skip zero-mean / unit-energy normalization");
    cmd->callback([this] { execute(); });
  }

  void execute() {
    Run r("filter build", run);
    r.config.mach = mach.params();
    std::vector<VideoVolume> examples;
    if (!corpus.empty()) {
      if (!videos.empty()) throw UsageError("give --corpus or --example, not both");
      const Corpus c = read_corpus(corpus);
      auto it = std::find(c.actions.begin(), c.actions.end(), label);
      if (it == c.actions.end()) throw Error(Errc::format, corpus + ": no videos labelled '" + label + "'");
      const auto idx = static_cast<std::size_t>(it - c.actions.begin());
      for (const auto& e : c.entries)
        if (e.label == idx) examples.push_back(extract_crop(e.video, e.crop));
      r.note("input.corpus", corpus);
    } else {
      if (videos.empty()) throw UsageError("give --corpus or at least one --example");
      if (!crops.specs.empty() && crops.specs.size() != videos.size())
        throw UsageError("--crop must be given once per --example");
      for (std::size_t i = 0; i < videos.size(); ++i) {
        VideoVolume v = load_video(videos[i]);
        examples.push_back(crops.specs.empty() ? std::move(v) : extract_crop(v, crops.parse(i)));
        r.note("input.example" + std::to_string(i), videos[i]);
      }
    }
    MachFilter f;
    if (!views.empty()) {
      if (views.size() != examples.size()) throw UsageError("--view must be given once per example");
      ViewExamples group{label, examples, {}};
      for (const auto& v : views) group.to_canonical.push_back(parse_view_option(v));
      f = build_type2_bank({group}, mach.params()).front();
      if (!raw) f = normalize_filter(std::move(f));
    } else {
      f = synthesize(spectra_stats(examples), mach.params(), label);
      if (!raw) f = normalize_filter(std::move(f));
    }
    r.note("examples", std::to_string(examples.size()));
    r.note("normalized", raw ? "false" : "true");
    r.emit(encode_filter(f));
    r.finish();
  }
};

struct FilterCompensate {
  RunOptions run;
  std::string filter, view;

  void add(CLI::App* parent) {
    auto* cmd = parent->add_subcommand("compensate", "Warp a filter to a new view and rescale alpha");
    add_run_options(cmd, run, true, "Filter output (MCH1)");
    cmd->add_option("--filter", filter, "Input filter (MCH1)")->required();
    cmd->add_option("--view", view, "Affine view a11,a12,a21,a22,b1,b2")->required();
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("filter compensate", run);
    const AffineView v = parse_view_option(view);
    const MachFilter f = compensate(decode_filter(read_file(filter), filter), v);
    r.config.mach = f.params;
    r.note("input.filter", filter);
    r.note("view", v.to_string());
    r.emit(encode_filter(f));
    r.finish();
  }
};

struct FilterFlip {
  RunOptions run;
  std::string filter;

  void add(CLI::App* parent) {
    auto* cmd = parent->add_subcommand("flip", "Mirror a filter left to right");
    add_run_options(cmd, run, true, "Filter output (MCH1)");
    cmd->add_option("--filter", filter, "Input filter (MCH1)")->required();
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("filter flip", run);
    const MachFilter f = flip_horizontal(decode_filter(read_file(filter), filter));
    r.config.mach = f.params;
    r.note("input.filter", filter);
    r.emit(encode_filter(f));
    r.finish();
  }
};

struct FilterBankCmd {
  RunOptions run;
  std::vector<std::string> filters;

  void add(CLI::App* parent) {
    auto* cmd = parent->add_subcommand("bank", "Bundle filters into an ordered bank");
    add_run_options(cmd, run, true, "Bank output (BNK1)");
    cmd->add_option("--filter", filters, "Filter files in bank order")->required();
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("filter bank", run);
    BankOptions b;
    b.filters = filters;
    const FilterBank bank = b.load(r);
    r.emit(encode_bank(bank));
    r.finish();
  }
};

struct MatrixGen {
  RunOptions run;
  std::size_t k = 0, d = 0, rows = 0, cols = 0;
  double cr = 0.0;
  std::string dist = "gaussian";
  bool materialize = false;

  void add(CLI::App* parent) {
    auto* cmd = parent->add_subcommand("gen", "Generate a measurement matrix");
    add_run_options(cmd, run, true, "Matrix output (PHI1)");
    cmd->add_option("--K", k, "Measurements per frame");
    cmd->add_option("--D", d, "Pixels per frame");
    cmd->add_option("--rows", rows, "Frame rows (with --cols instead of --D)");
    cmd->add_option("--cols", cols, "Frame columns");
    cmd->add_option("--cr", cr, "Compression ratio (instead of --K)");
    cmd->add_option("--dist", dist, "Entry distribution")->check(CLI::IsMember({"gaussian", "bernoulli"}))->capture_default_str();
    cmd->add_flag("--materialize", materialize, "Store every entry instead of the seed alone");
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("matrix gen", run);
    std::size_t pixels = d;
    if (rows || cols) {
      if (d) throw UsageError("give --D or --rows/--cols, not both");
      pixels = rows * cols;
    }
    if (pixels == 0) throw UsageError("frame size missing: give --D or --rows and --cols");
    if ((k == 0) == (cr == 0.0)) throw UsageError("give exactly one of --K or --cr");
    r.config.distribution = parse_distribution(dist);
    if (cr != 0.0) {
      r.config.compression_ratio = cr;
      r.config.validate();
      k = r.config.measurements(pixels);
    } else {
      r.config.compression_ratio = static_cast<double>(pixels) / static_cast<double>(k);
    }
    const MeasurementMatrix m = make_matrix(r.config.distribution, run.seed, k, pixels);
    r.note("K", std::to_string(k));
    r.note("D", std::to_string(pixels));
    r.note("materialized", materialize ? "true" : "false");
    r.emit(encode_matrix(m, materialize));
    r.finish();
  }
};

struct Sense {
  RunOptions run;
  std::string video, matrix, dist = "gaussian";
  double cr = 100.0, noise = 0.0;
  bool derivative = false;

  void add(CLI::App* app) {
    auto* cmd = app->add_subcommand("sense", "Simulate single-pixel-camera measurements of a video");
    add_run_options(cmd, run, true, "Compressed output (CMP1)");
    cmd->add_option("--video", video, "Video (.rvf or PGM directory)")->required();
    cmd->add_option("--matrix", matrix, "Measurement matrix (PHI1); generated from --seed when absent");
    cmd->add_option("--cr", cr, "Compression ratio D/K")->capture_default_str();
    cmd->add_option("--dist", dist, "Matrix distribution")->check(CLI::IsMember({"gaussian", "bernoulli"}))->capture_default_str();
    cmd->add_option("--noise", noise, "Measurement noise standard deviation")->capture_default_str();
    cmd->add_flag("--derivative", derivative, "Store temporally differenced measurements");
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("sense", run);
    SourceOptions src;
    src.video = video;
    src.matrix = matrix;
    src.cr = cr;
    src.dist = dist;
    src.noise = noise;
    src.record(r);
    const VideoVolume v = load_video(video);
    const MeasurementMatrix m = matrix_for(src, r, v.dims().frame_size());
    CompressedVideo z = compress(v, m, noise, run.seed);
    if (derivative) z = compressed_temporal_derivative(z);
    r.config.distribution = m.distribution();
    r.note("input.video", video);
    if (!matrix.empty()) r.note("input.matrix", matrix);
    r.note("K", std::to_string(m.rows()));
    r.note("derivative_order", std::to_string(z.derivative_order));
    r.emit(encode_compressed(z));
    r.finish();
  }
};

struct Respond {
  RunOptions run;
  SourceOptions src;
  BankOptions bank;
  std::string mode = "smashed";

  void add(CLI::App* app) {
    auto* cmd = app->add_subcommand("respond", "Correlate a video with every filter of a bank");
    add_run_options(cmd, run, true, "Output directory for response_NNN.rvf and summary.csv");
    src.add(cmd);
    bank.add(cmd);
    cmd->add_option("--mode", mode, "oracle (uncompressed) or smashed")->check(CLI::IsMember({"oracle", "smashed"}))->capture_default_str();
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("respond", run);
    if (mode == "oracle") {
      if (!src.compressed.empty()) throw UsageError("--mode oracle needs --video");
      src.cr = 1.0;
      src.matrix.clear();
    } else if (src.cr == 1.0 && src.compressed.empty() && src.matrix.empty()) {
      throw UsageError("--mode smashed needs --cr > 1, --matrix or --compressed");
    }
    const FilterBank b = bank.load(r);
    const Prepared p = prepare_source(src, r);
    const auto responses = correlate_bank(*p.correlator, b, p.provenance);
    fs::create_directories(run.out);
    std::ostringstream summary;
    summary << "filter,label,rows,cols,frames,peak,peak_row,peak_col,peak_frame,psr\n";
    for (std::size_t i = 0; i < responses.size(); ++i) {
      std::ostringstream name;
      name << "response_" << std::setw(3) << std::setfill('0') << i << ".rvf";
      write_file_atomic(fs::path(run.out) / name.str(), encode_rvf(responses[i].values));
      const PooledFeatures pooled = max_pool_features(responses[i]);
      const Index3 at = pooled.peaks[0];
      const Dims3& d = responses[i].dims();
      summary << i << ',' << csv_label(b.filters[i].label) << ',' << d.rows << ',' << d.cols << ',' << d.frames << ','
              << fmt17(pooled.values[0]) << ',' << at.row << ',' << at.col << ',' << at.frame << ','
              << fmt17(peak_to_sidelobe(responses[i], at)) << '\n';
    }
    write_text_atomic(fs::path(run.out) / "summary.csv", summary.str());
    r.note("mode", mode);
    r.finish();
  }
};

// Features for one video or every video of a corpus.
struct Features {
  RunOptions run;
  SourceOptions src;
  BankOptions bank;
  std::string corpus, name, label;

  void add(CLI::App* app) {
    auto* cmd = app->add_subcommand("features", "Pooled and PSR features per filter (one CSV row per video)");
    add_run_options(cmd, run, false, "Feature CSV ('-' for stdout)");
    src.add(cmd);
    bank.add(cmd);
    cmd->add_option("--corpus", corpus, "Corpus directory (one row per video)");
    cmd->add_option("--name", name, "Row name for a single video")->capture_default_str();
    cmd->add_option("--label", label, "Label column for a single video");
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("features", run);
    const FilterBank b = bank.load(r);
    std::string csv = feature_csv_header(b.size());
    if (!corpus.empty()) {
      if (!src.video.empty() || !src.compressed.empty()) throw UsageError("give --corpus or a single video, not both");
      src.record(r);
      const Corpus c = read_corpus(corpus);
      r.note("input.corpus", corpus);
      std::optional<MeasurementMatrix> shared;
      if (!(src.matrix.empty() && r.config.oracle()) && !c.entries.empty())
        shared = matrix_for(src, r, c.entries.front().video.dims().frame_size());
      for (std::size_t i = 0; i < c.entries.size(); ++i) {
        const auto& e = c.entries[i];
        if (shared && e.video.dims().frame_size() != shared->cols())
          throw Error(Errc::dimension, e.name + ": frame size differs from the rest of the corpus");
        const Prepared p = prepare_video(e.video, src, r, splitmix64_mix(run.seed ^ (0xC0FFEEULL + i)),
                                         shared ? &*shared : nullptr);
        csv += feature_row(e.name, c.actions[e.label], feature_vector(correlate_bank(*p.correlator, b, p.provenance)));
      }
    } else {
      const Prepared p = prepare_source(src, r);
      const std::string row_name = name.empty() ? (src.video.empty() ? src.compressed : src.video) : name;
      csv += feature_row(fs::path(row_name).filename().string(), label,
                         feature_vector(correlate_bank(*p.correlator, b, p.provenance)));
    }
    r.emit(csv);
    r.finish();
  }
};

struct Train {
  RunOptions run;
  std::string features;
  BankOptions bank;
  double lambda = 1e-2;
  std::size_t epochs = 300;

  void add(CLI::App* app) {
    auto* cmd = app->add_subcommand("train", "Train one-vs-rest linear SVMs on a feature CSV");
    add_run_options(cmd, run, true, "Model output (MDL1)");
    cmd->add_option("--features", features, "Feature CSV from the features command")->required();
    bank.add(cmd);
    cmd->add_option("--svm-lambda", lambda, "L2 regularization")->capture_default_str();
    cmd->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("train", run);
    const FilterBank b = bank.load(r);
    const CsvTable t = read_csv(features);
    const std::size_t label_col = t.column("label", features);
    const std::size_t first = t.column("name", features) + 2;
    if (t.header.size() - first != b.size() * kBlockSize)
      throw Error(Errc::dimension, features + ": " + std::to_string(t.header.size() - first) +
                                       " feature columns but the bank needs " + std::to_string(b.size() * kBlockSize));
    std::vector<std::vector<double>> x;
    std::vector<std::size_t> y;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto& row = t.rows[i];
      auto it = std::find(b.actions.begin(), b.actions.end(), row[label_col]);
      if (it == b.actions.end())
        throw Error(Errc::format, features + ": row " + std::to_string(i + 1) + " label '" + row[label_col] +
                                      "' is not an action of the bank");
      y.push_back(static_cast<std::size_t>(it - b.actions.begin()));
      std::vector<double> v;
      for (std::size_t j = first; j < row.size(); ++j) v.push_back(to_double(row[j], features));
      x.push_back(std::move(v));
    }
    r.config.svm.lambda = lambda;
    r.config.svm.epochs = epochs;
    const SvmModel m = train_svm(x, y, r.config.svm);
    r.note("input.features", features);
    r.note("samples", std::to_string(x.size()));
    r.emit(encode_model(m));
    r.finish();
  }
};

struct Recognize {
  RunOptions run;
  SourceOptions src;
  BankOptions bank;
  std::string model, mode = "svm";

  void add(CLI::App* app) {
    auto* cmd = app->add_subcommand("recognize", "Classify one video");
    add_run_options(cmd, run, false, "Score CSV ('-' for stdout)");
    src.add(cmd);
    bank.add(cmd);
    cmd->add_option("--model", model, "SVM model (MDL1), required for --mode svm");
    cmd->add_option("--mode", mode, "svm or peak-psr")->check(CLI::IsMember({"svm", "peak-psr"}))->capture_default_str();
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("recognize", run);
    const FilterBank b = bank.load(r);
    r.config.mode = mode == "svm" ? ClassifierMode::svm : ClassifierMode::peak_psr;
    std::optional<SvmModel> m;
    if (r.config.mode == ClassifierMode::svm) {
      if (model.empty()) throw UsageError("--mode svm needs --model");
      m = decode_model(read_file(model), model);
      if (m->class_count != b.actions.size())
        throw Error(Errc::dimension, model + ": model has " + std::to_string(m->class_count) + " classes, bank has " +
                                         std::to_string(b.actions.size()) + " actions");
      r.note("input.model", model);
    }
    const Prepared p = prepare_source(src, r);
    const FeatureVector fv = feature_vector(correlate_bank(*p.correlator, b, p.provenance));
    const Classification c = m ? classify(fv.values, *m) : classify_peak_psr(fv, b);
    std::string csv = "class,action,score,selected\n";
    for (std::size_t k = 0; k < c.scores.size(); ++k)
      csv += std::to_string(k) + "," + csv_label(b.actions[k]) + "," + fmt17(c.scores[k]) + "," +
             (k == c.label ? "1" : "0") + "\n";
    r.note("label", b.actions[c.label]);
    r.emit(csv);
    if (run.out != "-") std::cout << "label=" << b.actions[c.label] << "\n";
    r.finish();
  }
};

std::string boxes_csv(const std::vector<BoundingBox>& boxes) {
  std::string csv = "frame,center_row,center_col,height,width,mass,degenerate\n";
  for (const auto& b : boxes)
    csv += std::to_string(b.frame_index) + "," + std::to_string(b.center_row) + "," + std::to_string(b.center_col) + "," +
           std::to_string(b.height) + "," + std::to_string(b.width) + "," + fmt17(b.mass_fraction) + "," +
           (b.degenerate ? "1" : "0") + "\n";
  return csv;
}

struct Localize {
  RunOptions run;
  SourceOptions src;
  BankOptions bank;
  std::string label, box = "mass";
  double lambda = kDefaultLambda;

  void add(CLI::App* app) {
    auto* cmd = app->add_subcommand("localize", "Per-frame bounding boxes from one filter's response");
    add_run_options(cmd, run, false, "Box CSV ('-' for stdout)");
    src.add(cmd);
    bank.add(cmd);
    cmd->add_option("--label", label, "Action whose first filter localizes (default: first filter)");
    cmd->add_option("--lambda", lambda, "Mass fraction kept inside the box")->capture_default_str();
    cmd->add_option("--box", box, "mass or fixed")->check(CLI::IsMember({"mass", "fixed"}))->capture_default_str();
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("localize", run);
    r.config.lambda = lambda;
    r.config.box = box == "mass" ? BoxMode::mass : BoxMode::fixed;
    r.config.validate();
    const FilterBank b = bank.load(r);
    std::size_t pick = 0;
    if (!label.empty()) {
      auto it = std::find_if(b.filters.begin(), b.filters.end(), [&](const MachFilter& f) { return f.label == label; });
      if (it == b.filters.end()) throw Error(Errc::format, "no filter labelled '" + label + "'");
      pick = static_cast<std::size_t>(it - b.filters.begin());
    }
    const Prepared p = prepare_source(src, r);
    const ResponseVolume resp = p.correlator->correlate(b.filters[pick].volume, p.provenance);
    r.note("label", b.filters[pick].label);
    r.emit(boxes_csv(locate_video(resp, b.filters[pick].dims(), lambda, r.config.box)));
    r.finish();
  }
};

struct Overlay {
  RunOptions run;
  std::string video, boxes;

  void add(CLI::App* app) {
    auto* cmd = app->add_subcommand("overlay", "Draw boxes on video frames as PPM images");
    add_run_options(cmd, run, true, "Output directory for frame_NNNN.ppm");
    cmd->add_option("--video", video, "Video (.rvf or PGM directory)")->required();
    cmd->add_option("--boxes", boxes, "Box CSV from localize")->required();
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("overlay", run);
    const VideoVolume v = load_video(video);
    const CsvTable t = read_csv(boxes);
    const std::size_t fc = t.column("frame", boxes), rc = t.column("center_row", boxes), cc = t.column("center_col", boxes);
    const std::size_t hc = t.column("height", boxes), wc = t.column("width", boxes);
    std::vector<BoundingBox> list;
    bool outside = false;
    for (const auto& row : t.rows) {
      BoundingBox b;
      b.frame_index = to_size(row[fc], boxes);
      b.center_row = to_size(row[rc], boxes);
      b.center_col = to_size(row[cc], boxes);
      b.height = to_size(row[hc], boxes);
      b.width = to_size(row[wc], boxes);
      // The CSV keeps centre and size; the rectangle is rebuilt centred and
      // clipped at the top-left edge.
      const std::size_t half_h = b.height ? (b.height - 1) / 2 : 0, half_w = b.width ? (b.width - 1) / 2 : 0;
      if (half_h > b.center_row || half_w > b.center_col) outside = true;
      b.top = b.center_row - std::min(half_h, b.center_row);
      b.left = b.center_col - std::min(half_w, b.center_col);
      if (b.frame_index >= v.frames())
        throw Error(Errc::dimension, boxes + ": box for frame " + std::to_string(b.frame_index) + " but the video has " +
                                         std::to_string(v.frames()) + " frames");
      list.push_back(b);
    }
    const auto frames = render_overlay(v, list);
    fs::create_directories(run.out);
    for (std::size_t t2 = 0; t2 < frames.size(); ++t2) {
      std::ostringstream name;
      name << "frame_" << std::setw(4) << std::setfill('0') << t2 << ".ppm";
      write_file_atomic(fs::path(run.out) / name.str(), frames[t2].ppm);
      if (frames[t2].clipped) outside = true;
    }
    if (outside) std::cerr << "warning: some boxes extend past the frame and were clipped\n";
    r.note("input.video", video);
    r.note("input.boxes", boxes);
    r.finish();
  }
};

struct JlCheck {
  RunOptions run;
  std::size_t k = 0, d = 0, trials = 1000;
  std::string dist = "gaussian", pairs = "orthogonal";

  void add(CLI::App* app) {
    auto* cmd = app->add_subcommand("jl-check", "Monte Carlo inner-product preservation report");
    add_run_options(cmd, run, false, "CSV ('-' for stdout)");
    cmd->add_option("--K", k, "Measurements")->required();
    cmd->add_option("--D", d, "Dimension")->required();
    cmd->add_option("--trials", trials, "Vector pairs")->capture_default_str();
    cmd->add_option("--dist", dist, "Matrix distribution")->check(CLI::IsMember({"gaussian", "bernoulli"}))->capture_default_str();
    cmd->add_option("--pairs", pairs, "orthogonal, random or self")
        ->check(CLI::IsMember({"orthogonal", "random", "self"}))
        ->capture_default_str();
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("jl-check", run);
    r.config.distribution = parse_distribution(dist);
    r.config.compression_ratio = k ? static_cast<double>(d) / static_cast<double>(k) : 1.0;
    const PairMode mode = pairs == "orthogonal" ? PairMode::orthogonal : pairs == "random" ? PairMode::random : PairMode::self;
    const JlReport rep = jl_report(JlParams{r.config.distribution, run.seed, k, d}, trials, run.seed, mode);
    r.note("trials", std::to_string(trials));
    r.note("pairs", pairs);
    r.emit("K,D,trials,mean_abs_error,max_abs_error,predicted_scale\n" + std::to_string(rep.measurements) + "," +
           std::to_string(rep.dimension) + "," + std::to_string(rep.trial_count) + "," + fmt17(rep.mean_abs_error) + "," +
           fmt17(rep.max_abs_error) + "," + fmt17(rep.predicted_scale) + "\n");
    r.finish();
  }
};

// Corpus selection and experiment settings shared by eval loo / cr-sweep.
struct EvalOptions {
  std::string corpus;
  bool synthetic = false;
  SyntheticConfig synth;
  MachOptions mach;
  std::string dist = "gaussian", mode = "svm", box = "mass";
  double noise = 0.0, lambda = kDefaultLambda, svm_lambda = 1e-2;
  std::size_t epochs = 300;

  void add(CLI::App* cmd) {
    cmd->add_option("--corpus", corpus, "Corpus directory with corpus.csv");
    cmd->add_flag("--synthetic", synthetic, "Use the generated three-action synthetic suite");
    cmd->add_option("--synthetic-seed", synth.seed, "Synthetic suite seed")->capture_default_str();
    cmd->add_option("--instances", synth.instances, "Synthetic videos per action")->capture_default_str();
    cmd->add_option("--jitter", synth.jitter, "Synthetic start jitter in pixels")->capture_default_str();
    mach.add(cmd);
    cmd->add_option("--dist", dist, "Matrix distribution")->check(CLI::IsMember({"gaussian", "bernoulli"}))->capture_default_str();
    cmd->add_option("--noise", noise, "Measurement noise standard deviation")->capture_default_str();
    cmd->add_option("--mode", mode, "Classifier: svm or peak-psr")->check(CLI::IsMember({"svm", "peak-psr"}))->capture_default_str();
    cmd->add_option("--lambda", lambda, "Localization mass fraction")->capture_default_str();
    cmd->add_option("--box", box, "mass or fixed")->check(CLI::IsMember({"mass", "fixed"}))->capture_default_str();
    cmd->add_option("--svm-lambda", svm_lambda, "SVM L2 regularization")->capture_default_str();
    cmd->add_option("--epochs", epochs, "SVM epochs")->capture_default_str();
  }

  Corpus load(Run& r) const {
    if (synthetic == !corpus.empty()) throw UsageError("give exactly one of --corpus or --synthetic");
    if (synthetic) {
      r.note("input.synthetic_seed", std::to_string(synth.seed));
      r.note("input.synthetic_instances", std::to_string(synth.instances));
      r.note("input.synthetic_jitter", synth.jitter);
      return corpus_from_synthetic(make_synthetic_suite(synth));
    }
    r.note("input.corpus", corpus);
    return read_corpus(corpus);
  }

  void configure(Run& r) const {
    r.config.distribution = parse_distribution(dist);
    r.config.noise_sigma = noise;
    r.config.mach = mach.params();
    r.config.mode = mode == "svm" ? ClassifierMode::svm : ClassifierMode::peak_psr;
    r.config.lambda = lambda;
    r.config.box = box == "mass" ? BoxMode::mass : BoxMode::fixed;
    r.config.svm.lambda = svm_lambda;
    r.config.svm.epochs = epochs;
  }
};

struct EvalLoo {
  RunOptions run;
  EvalOptions eval;
  double cr = 100.0;

  void add(CLI::App* parent) {
    auto* cmd = parent->add_subcommand("loo", "Leave-one-group-out recognition and localization");
    add_run_options(cmd, run, false, "Per-video CSV ('-' for stdout)");
    eval.add(cmd);
    cmd->add_option("--cr", cr, "Compression ratio; 1 is the uncompressed oracle path")->capture_default_str();
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("eval loo", run);
    eval.configure(r);
    r.config.compression_ratio = cr;
    r.config.validate();
    const Corpus c = eval.load(r);
    const EvalResult res = evaluate(c, r.config);
    std::string csv = "video,truth,svm_label,psr_label,seconds,frames,within15\n";
    for (const auto& v : res.videos) {
      std::size_t within = 0;
      for (double d : v.displacements) within += d <= 15.0 ? 1 : 0;
      csv += csv_label(c.entries[v.index].name) + "," + csv_label(c.actions[v.truth]) + "," +
             csv_label(c.actions[v.svm_label]) + "," + csv_label(c.actions[v.psr_label]) + "," + fmt17(v.seconds) + "," +
             std::to_string(v.displacements.size()) + "," + std::to_string(within) + "\n";
    }
    r.note("K", std::to_string(res.measurements));
    r.emit(csv);
    std::fprintf(stderr, "K=%zu accuracy_svm=%.4f accuracy_psr=%.4f mean_runtime_s=%.4f frames=%zu within15=%.4f\n",
                 res.measurements, res.accuracy_svm, res.accuracy_psr, res.mean_runtime_s, res.frames_localized,
                 res.fraction_within[2]);
    r.finish();
  }
};

struct EvalSweep {
  RunOptions run;
  EvalOptions eval;
  std::vector<double> crs{1, 100, 200, 300, 500};
  std::string protocol = "loo";

  void add(CLI::App* parent) {
    auto* cmd = parent->add_subcommand("cr-sweep", "Accuracy and runtime across compression ratios");
    add_run_options(cmd, run, false, "CSV cr,K,accuracy,mean_runtime_s ('-' for stdout)");
    eval.add(cmd);
    cmd->add_option("--crs", crs, "Compression ratios")->delimiter(',')->capture_default_str();
    cmd->add_option("--protocol", protocol, "loo or fixed-split")->check(CLI::IsMember({"loo", "fixed-split"}))->capture_default_str();
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("eval cr-sweep", run);
    eval.configure(r);
    r.config.protocol = protocol == "loo" ? Protocol::leave_one_out : Protocol::fixed_split;
    for (double cr : crs)
      if (!(cr >= 1.0)) throw UsageError("--crs values must be >= 1");
    const Corpus c = eval.load(r);
    const auto rows = cr_sweep(c, r.config, crs);
    std::string csv = "cr,K,accuracy,mean_runtime_s\n";
    std::string list;
    for (const auto& row : rows) {
      csv += fmt17(row.cr) + "," + std::to_string(row.measurements) + "," + fmt17(row.accuracy) + "," +
             fmt17(row.mean_runtime_s) + "\n";
      list += (list.empty() ? "" : ";") + fmt17(row.cr);
    }
    r.note("crs", list);
    r.config.compression_ratio = crs.empty() ? 1.0 : crs.front();
    r.emit(csv);
    r.finish();
  }
};

struct Synth {
  RunOptions run;
  SyntheticConfig synth;

  void add(CLI::App* app) {
    auto* cmd = app->add_subcommand("synth", "Write the synthetic three-action suite as a corpus directory");
    add_run_options(cmd, run, true, "Corpus directory");
    cmd->add_option("--synthetic-seed", synth.seed, "Suite seed")->capture_default_str();
    cmd->add_option("--instances", synth.instances, "Videos per action")->capture_default_str();
    cmd->add_option("--jitter", synth.jitter, "Start jitter in pixels")->capture_default_str();
    cmd->add_option("--field", synth.field, "Frame side in pixels")->capture_default_str();
    cmd->add_option("--frames", synth.frames, "Frames per video")->capture_default_str();
    cmd->callback([this] { execute(); });
  }
  void execute() {
    Run r("synth", run);
    write_corpus(run.out, corpus_from_synthetic(make_synthetic_suite(synth)));
    r.note("input.synthetic_seed", std::to_string(synth.seed));
    r.note("input.synthetic_instances", std::to_string(synth.instances));
    r.note("input.synthetic_jitter", synth.jitter);
    r.note("input.synthetic_field", std::to_string(synth.field));
    r.note("input.synthetic_frames", std::to_string(synth.frames));
    r.finish();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstruction-free action recognition from compressive measurements"};
  app.require_subcommand(1);

  auto* filter = app.add_subcommand("filter", "MACH filter synthesis and view handling");
  filter->require_subcommand(1);
  FilterBuild build;
  FilterCompensate comp;
  FilterFlip flip;
  FilterBankCmd bank;
  build.add(filter);
  comp.add(filter);
  flip.add(filter);
  bank.add(filter);

  auto* matrix = app.add_subcommand("matrix", "Measurement matrices");
  matrix->require_subcommand(1);
  MatrixGen gen;
  gen.add(matrix);

  Sense sense;
  Respond respond;
  Features features;
  Train train;
  Recognize recognize;
  Localize localize;
  Overlay overlay;
  JlCheck jl;
  Synth synth;
  synth.add(&app);
  sense.add(&app);
  respond.add(&app);
  features.add(&app);
  train.add(&app);
  recognize.add(&app);
  localize.add(&app);
  overlay.add(&app);
  jl.add(&app);

  auto* eval = app.add_subcommand("eval", "Evaluation harness");
  eval->require_subcommand(1);
  EvalLoo loo;
  EvalSweep sweep;
  loo.add(eval);
  sweep.add(eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.is_io() ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
