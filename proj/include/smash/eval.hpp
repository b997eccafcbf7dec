#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "smash/inference.hpp"
#include "smash/localization.hpp"
#include "smash/mach.hpp"
#include "smash/sensing.hpp"
#include "smash/synthetic.hpp"

namespace smash {

struct CorpusEntry {
  std::string name;
  VideoVolume video;
  std::size_t label = 0;
  std::string group;  // held out together under leave-one-out
  Crop crop;          // filter training example inside the video
  std::vector<std::pair<double, double>> centers;  // optional (row, col) per frame
};

struct Corpus {
  std::vector<std::string> actions;
  std::vector<CorpusEntry> entries;
};

// Each synthetic video forms its own group.
Corpus corpus_from_synthetic(SyntheticSuite suite);

// Directory with corpus.csv:
//   path,label,group,crop_row,crop_col,crop_frame,crop_rows,crop_cols,crop_frames,centers
// path is an .rvf file or PGM directory, centers an optional frame,row,col CSV;
// both relative to the corpus directory.
Corpus read_corpus(const std::filesystem::path& dir);
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus);

enum class ClassifierMode { svm, peak_psr };
enum class Protocol { leave_one_out, fixed_split };

const char* to_string(ClassifierMode m);
const char* to_string(Protocol p);

struct ExperimentConfig {
  double compression_ratio = 100.0;  // D/K; 1 selects the uncompressed oracle path
  Distribution distribution = Distribution::gaussian;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  MachParams mach;
  double lambda = kDefaultLambda;
  ClassifierMode mode = ClassifierMode::svm;
  Protocol protocol = Protocol::leave_one_out;
  SvmParams svm;
  BoxMode box = BoxMode::mass;

  // K = max(1, round(D / compression_ratio)).
  std::size_t measurements(std::size_t pixels) const;
  bool oracle() const { return compression_ratio == 1.0; }
  void validate() const;
};

// Flat key=value lines, sorted by key, one trailing newline.
std::string manifest_text(const ExperimentConfig& config, const std::map<std::string, std::string>& extra = {});

struct VideoOutcome {
  std::size_t index = 0;
  std::size_t truth = 0;
  std::size_t svm_label = 0;
  std::size_t psr_label = 0;
  double seconds = 0.0;  // sensing + correlation + features + classification
  std::vector<double> displacements;
};

struct EvalResult {
  std::size_t measurements = 0;  // K (0 for the oracle path)
  double accuracy_svm = 0.0;
  double accuracy_psr = 0.0;
  double mean_runtime_s = 0.0;
  std::size_t frames_localized = 0;
  std::array<double, 5> fraction_within{};  // displacement <= 5, 10, 15, 20, 25 px
  std::vector<VideoOutcome> videos;

  double accuracy(ClassifierMode mode) const { return mode == ClassifierMode::svm ? accuracy_svm : accuracy_psr; }
};

// Trains per-action filters on the training folds' crops, correlates every
// video (smashed or oracle path), classifies held-out videos with both the
// SVM and the peak-PSR rule, and localizes with the selected label's filter.
EvalResult evaluate(const Corpus& corpus, const ExperimentConfig& config);

struct SweepRow {
  double cr = 0.0;
  std::size_t measurements = 0;
  double accuracy = 0.0;
  double mean_runtime_s = 0.0;
};

std::vector<SweepRow> cr_sweep(const Corpus& corpus, ExperimentConfig config, const std::vector<double>& ratios);

// Ground-truth centre for response frame n: the annotated trajectory at the
// middle of the filter's temporal window, linearly interpolated.
std::pair<double, double> window_center(const std::vector<std::pair<double, double>>& centers, std::size_t frame,
                                        std::size_t window_frames);

}  // namespace smash
