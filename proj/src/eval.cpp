#include "smash/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "smash/codec.hpp"
#include "smash/error.hpp"
#include "smash/parallel.hpp"
#include "smash/rng.hpp"
#include "smash/stsf.hpp"

namespace smash {

namespace fs = std::filesystem;

Corpus corpus_from_synthetic(SyntheticSuite suite) {
  Corpus c;
  c.actions = std::move(suite.actions);
  for (std::size_t i = 0; i < suite.videos.size(); ++i) {
    auto& v = suite.videos[i];
    CorpusEntry e;
    e.name = "synthetic_" + std::to_string(i);
    e.video = std::move(v.video);
    e.label = v.label;
    e.group = std::to_string(i);
    e.crop = v.crop;
    e.centers = std::move(v.centers);
    c.entries.push_back(std::move(e));
  }
  return c;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::size_t parse_size(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(Errc::format, context + ": expected a non-negative integer, got '" + s + "'");
  }
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::format, context + ": expected a number, got '" + s + "'");
  }
}

std::string trim_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

Corpus read_corpus(const fs::path& dir) {
  const fs::path index = dir / "corpus.csv";
  std::ifstream in(index);
  if (!in) throw Error(Errc::io, "cannot open '" + index.string() + "'");
  std::string line;
  std::getline(in, line);
  if (trim_cr(line) != "path,label,group,crop_row,crop_col,crop_frame,crop_rows,crop_cols,crop_frames,centers")
    throw Error(Errc::format, index.string() + ": unexpected header");

  Corpus c;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const std::string ctx = index.string() + ":" + std::to_string(line_no);
    const auto cells = split_csv(line);
    if (cells.size() != 10) throw Error(Errc::format, ctx + ": expected 10 columns, got " + std::to_string(cells.size()));

    CorpusEntry e;
    e.name = cells[0];
    e.video = load_video(dir / cells[0]);
    auto it = std::find(c.actions.begin(), c.actions.end(), cells[1]);
    if (it == c.actions.end()) {
      e.label = c.actions.size();
      c.actions.push_back(cells[1]);
    } else {
      e.label = static_cast<std::size_t>(it - c.actions.begin());
    }
    e.group = cells[2];
    e.crop.row = parse_size(cells[3], ctx);
    e.crop.col = parse_size(cells[4], ctx);
    e.crop.frame = parse_size(cells[5], ctx);
    e.crop.dims = Dims3{parse_size(cells[6], ctx), parse_size(cells[7], ctx), parse_size(cells[8], ctx)};
    if (!cells[9].empty()) {
      std::ifstream cin(dir / cells[9]);
      if (!cin) throw Error(Errc::io, ctx + ": cannot open centers file '" + cells[9] + "'");
      std::string cl;
      std::getline(cin, cl);
      while (std::getline(cin, cl)) {
        cl = trim_cr(cl);
        if (cl.empty()) continue;
        const auto cc = split_csv(cl);
        if (cc.size() != 3) throw Error(Errc::format, cells[9] + ": expected frame,row,col");
        if (parse_size(cc[0], cells[9]) != e.centers.size())
          throw Error(Errc::format, cells[9] + ": frames must be listed in order from 0");
        e.centers.emplace_back(parse_double(cc[1], cells[9]), parse_double(cc[2], cells[9]));
      }
    }
    c.entries.push_back(std::move(e));
  }
  return c;
}

void write_corpus(const fs::path& dir, const Corpus& corpus) {
  fs::create_directories(dir / "videos");
  std::ostringstream index;
  index << "path,label,group,crop_row,crop_col,crop_frame,crop_rows,crop_cols,crop_frames,centers\n";
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    const auto& e = corpus.entries[i];
    std::ostringstream stem;
    stem << std::setw(4) << std::setfill('0') << i;
    const std::string video_rel = "videos/" + stem.str() + ".rvf";
    write_file_atomic(dir / video_rel, encode_rvf(e.video));
    std::string centers_rel;
    if (!e.centers.empty()) {
      centers_rel = "videos/" + stem.str() + "_centers.csv";
      std::ostringstream cs;
      cs << "frame,row,col\n";
      for (std::size_t t = 0; t < e.centers.size(); ++t)
        cs << t << ',' << fmt17(e.centers[t].first) << ',' << fmt17(e.centers[t].second) << '\n';
      write_text_atomic(dir / centers_rel, cs.str());
    }
    index << video_rel << ',' << corpus.actions.at(e.label) << ',' << e.group << ',' << e.crop.row << ',' << e.crop.col
          << ',' << e.crop.frame << ',' << e.crop.dims.rows << ',' << e.crop.dims.cols << ',' << e.crop.dims.frames << ','
          << centers_rel << '\n';
  }
  write_text_atomic(dir / "corpus.csv", index.str());
}

const char* to_string(ClassifierMode m) { return m == ClassifierMode::svm ? "svm" : "peak-psr"; }
const char* to_string(Protocol p) { return p == Protocol::leave_one_out ? "leave-one-out" : "fixed-split"; }

std::size_t ExperimentConfig::measurements(std::size_t pixels) const {
  const double k = std::round(static_cast<double>(pixels) / compression_ratio);
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

void ExperimentConfig::validate() const {
  if (!(compression_ratio >= 1.0) || !std::isfinite(compression_ratio))
    throw Error(Errc::dimension, "compression ratio must be >= 1");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw Error(Errc::dimension, "lambda must lie in (0, 1]");
  if (!(noise_sigma >= 0.0)) throw Error(Errc::dimension, "noise sigma must be >= 0");
}

std::string manifest_text(const ExperimentConfig& config, const std::map<std::string, std::string>& extra) {
  std::map<std::string, std::string> kv = extra;
  kv["compression_ratio"] = fmt17(config.compression_ratio);
  kv["matrix_distribution"] = to_string(config.distribution);
  kv["matrix_seed"] = std::to_string(config.seed);
  kv["noise_sigma"] = fmt17(config.noise_sigma);
  kv["alpha"] = fmt17(config.mach.alpha);
  kv["beta"] = fmt17(config.mach.beta);
  kv["gamma"] = fmt17(config.mach.gamma);
  kv["lambda"] = fmt17(config.lambda);
  kv["classifier"] = to_string(config.mode);
  kv["protocol"] = to_string(config.protocol);
  kv["svm_lambda"] = fmt17(config.svm.lambda);
  kv["svm_epochs"] = std::to_string(config.svm.epochs);
  kv["svm_seed"] = std::to_string(config.svm.seed);
  kv["box"] = config.box == BoxMode::mass ? "mass" : "fixed";
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::pair<double, double> window_center(const std::vector<std::pair<double, double>>& centers, std::size_t frame,
                                        std::size_t window_frames) {
  if (centers.empty()) throw Error(Errc::alignment, "no ground-truth centres");
  const double mid = static_cast<double>(frame) + (static_cast<double>(window_frames) - 1.0) / 2.0;
  const double last = static_cast<double>(centers.size() - 1);
  const double t = std::clamp(mid, 0.0, last);
  const auto lo = static_cast<std::size_t>(std::floor(t));
  const std::size_t hi = std::min(lo + 1, centers.size() - 1);
  const double w = t - static_cast<double>(lo);
  return {(1.0 - w) * centers[lo].first + w * centers[hi].first, (1.0 - w) * centers[lo].second + w * centers[hi].second};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct DimsLess {
  bool operator()(const Dims3& a, const Dims3& b) const {
    return std::tie(a.rows, a.cols, a.frames) < std::tie(b.rows, b.cols, b.frames);
  }
};

// Folds as (train indices, test indices).
std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> make_folds(const Corpus& corpus,
                                                                                      Protocol protocol) {
  std::vector<std::string> groups;
  for (const auto& e : corpus.entries)
    if (std::find(groups.begin(), groups.end(), e.group) == groups.end()) groups.push_back(e.group);
  if (groups.size() < 2) throw Error(Errc::arity, "evaluation needs at least two groups");

  std::vector<std::vector<std::string>> held_out;
  if (protocol == Protocol::leave_one_out) {
    for (const auto& g : groups) held_out.push_back({g});
  } else {
    std::vector<std::string> sorted = groups;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t train = (2 * sorted.size() + 2) / 3;
    held_out.emplace_back(sorted.begin() + static_cast<std::ptrdiff_t>(std::min(train, sorted.size() - 1)), sorted.end());
  }

  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> folds;
  for (const auto& test_groups : held_out) {
    std::pair<std::vector<std::size_t>, std::vector<std::size_t>> fold;
    for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
      const bool test = std::find(test_groups.begin(), test_groups.end(), corpus.entries[i].group) != test_groups.end();
      (test ? fold.second : fold.first).push_back(i);
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

}  // namespace

EvalResult evaluate(const Corpus& corpus, const ExperimentConfig& config) {
  config.validate();
  if (corpus.actions.size() < 2) throw Error(Errc::degenerate_labels, "evaluation needs at least two actions");
  if (corpus.entries.empty()) throw Error(Errc::arity, "empty corpus");
  const std::size_t n = corpus.entries.size();

  // Camera side: one prepared correlator per video.
  std::vector<Correlator> prepared;
  std::vector<double> prep_seconds(n, 0.0);
  prepared.reserve(n);
  EvalResult result;
  if (config.oracle()) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto start = Clock::now();
      prepared.emplace_back(temporal_derivative(corpus.entries[i].video));
      prep_seconds[i] = seconds_since(start);
    }
  } else {
    const Dims3& first = corpus.entries.front().video.dims();
    for (const auto& e : corpus.entries)
      if (e.video.rows() != first.rows || e.video.cols() != first.cols)
        throw Error(Errc::dimension, "compressed evaluation needs a common frame size (" + e.name + " differs)");
    const MeasurementMatrix m =
        make_matrix(config.distribution, config.seed, config.measurements(first.frame_size()), first.frame_size());
    result.measurements = m.rows();
    for (std::size_t i = 0; i < n; ++i) {
      const auto start = Clock::now();
      const std::uint64_t noise_seed = splitmix64_mix(config.seed ^ (0xC0FFEEULL + i));
      const CompressedVideo z =
          compressed_temporal_derivative(compress(corpus.entries[i].video, m, config.noise_sigma, noise_seed));
      prepared.emplace_back(backproject(z, m));
      prep_seconds[i] = seconds_since(start);
    }
  }
  const Provenance provenance = config.oracle() ? Provenance::oracle : Provenance::smashed;

  std::size_t correct_svm = 0, correct_psr = 0, tested = 0;
  std::vector<double> all_displacements;

  for (const auto& [train, test] : make_folds(corpus, config.protocol)) {
    // Filters from training crops, one per action in action order.
    std::vector<MachFilter> filters;
    for (std::size_t a = 0; a < corpus.actions.size(); ++a) {
      std::vector<VideoVolume> crops;
      for (std::size_t i : train)
        if (corpus.entries[i].label == a) crops.push_back(extract_crop(corpus.entries[i].video, corpus.entries[i].crop));
      if (crops.empty()) throw Error(Errc::arity, "action '" + corpus.actions[a] + "' has no training videos in a fold");
      filters.push_back(train_filter(crops, config.mach, corpus.actions[a]));
    }
    const FilterBank bank = FilterBank::from_filters(std::move(filters));

    std::map<Dims3, std::vector<FilterSpectrum>, DimsLess> spectra;
    for (const auto& c : prepared) {
      auto& slot = spectra[c.video_dims()];
      if (slot.empty())
        for (const auto& f : bank.filters) slot.emplace_back(f.volume, c.video_dims());
    }

    auto features_of = [&](std::size_t i, std::vector<ResponseVolume>* keep) {
      const auto& specs = spectra.at(prepared[i].video_dims());
      std::vector<ResponseVolume> responses;
      responses.reserve(specs.size());
      for (const auto& s : specs) responses.push_back(prepared[i].correlate(s, provenance));
      FeatureVector fv = feature_vector(responses);
      if (keep) *keep = std::move(responses);
      return fv;
    };

    // Training features are cross-fitted: the filter of a video's own action is
    // rebuilt without that video so its peaks look like those of unseen videos.
    std::vector<std::vector<double>> train_x(train.size());
    std::vector<std::size_t> train_y(train.size());
    parallel_for(train.size(), [&](std::size_t k) {
      const std::size_t j = train[k];
      const std::size_t label = corpus.entries[j].label;
      std::vector<VideoVolume> crops;
      for (std::size_t i : train)
        if (i != j && corpus.entries[i].label == label)
          crops.push_back(extract_crop(corpus.entries[i].video, corpus.entries[i].crop));
      const auto& specs = spectra.at(prepared[j].video_dims());
      std::vector<ResponseVolume> responses;
      responses.reserve(specs.size());
      for (std::size_t f = 0; f < specs.size(); ++f) {
        if (f == label && !crops.empty()) {
          const MachFilter held = train_filter(crops, config.mach, corpus.actions[label]);
          responses.push_back(prepared[j].correlate(FilterSpectrum(held.volume, prepared[j].video_dims()), provenance));
        } else {
          responses.push_back(prepared[j].correlate(specs[f], provenance));
        }
      }
      train_x[k] = feature_vector(responses).values;
      train_y[k] = label;
    });
    const SvmModel model = train_svm(train_x, train_y, config.svm);

    std::vector<VideoOutcome> outcomes(test.size());
    parallel_for(test.size(), [&](std::size_t k) {
      const std::size_t i = test[k];
      const auto start = Clock::now();
      std::vector<ResponseVolume> responses;
      const FeatureVector fv = features_of(i, &responses);
      VideoOutcome o;
      o.index = i;
      o.truth = corpus.entries[i].label;
      o.svm_label = classify(fv.values, model).label;
      o.psr_label = classify_peak_psr(fv, bank).label;
      o.seconds = prep_seconds[i] + seconds_since(start);

      const auto& entry = corpus.entries[i];
      if (!entry.centers.empty()) {
        const std::size_t chosen = config.mode == ClassifierMode::svm ? o.svm_label : o.psr_label;
        const MachFilter& f = bank.filters[chosen];
        const auto boxes = locate_video(responses[chosen], f.dims(), config.lambda, config.box);
        std::vector<std::pair<double, double>> truth;
        for (const auto& b : boxes) truth.push_back(window_center(entry.centers, b.frame_index, entry.crop.dims.frames));
        o.displacements = center_error(boxes, truth).displacements;
      }
      outcomes[k] = std::move(o);
    });

    for (auto& o : outcomes) {
      ++tested;
      correct_svm += o.svm_label == o.truth ? 1 : 0;
      correct_psr += o.psr_label == o.truth ? 1 : 0;
      all_displacements.insert(all_displacements.end(), o.displacements.begin(), o.displacements.end());
      result.videos.push_back(std::move(o));
    }
  }

  std::sort(result.videos.begin(), result.videos.end(),
            [](const VideoOutcome& a, const VideoOutcome& b) { return a.index < b.index; });
  result.accuracy_svm = static_cast<double>(correct_svm) / static_cast<double>(tested);
  result.accuracy_psr = static_cast<double>(correct_psr) / static_cast<double>(tested);
  double total = 0.0;
  for (const auto& v : result.videos) total += v.seconds;
  result.mean_runtime_s = total / static_cast<double>(result.videos.size());
  result.frames_localized = all_displacements.size();
  for (std::size_t k = 0; k < CenterErrorReport::thresholds.size(); ++k) {
    std::size_t within = 0;
    for (double dsp : all_displacements) within += dsp <= CenterErrorReport::thresholds[k] ? 1 : 0;
    result.fraction_within[k] =
        all_displacements.empty() ? 0.0 : static_cast<double>(within) / static_cast<double>(all_displacements.size());
  }
  return result;
}

std::vector<SweepRow> cr_sweep(const Corpus& corpus, ExperimentConfig config, const std::vector<double>& ratios) {
  std::vector<SweepRow> rows;
  for (double cr : ratios) {
    config.compression_ratio = cr;
    const EvalResult r = evaluate(corpus, config);
    rows.push_back(SweepRow{cr, config.oracle() ? corpus.entries.front().video.dims().frame_size() : r.measurements,
                            r.accuracy(config.mode), r.mean_runtime_s});
  }
  return rows;
}

}  // namespace smash
