#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lgnav/grid.hpp"

namespace lgnav {

// Per-cell vision-language features aligned 1:1 with an occupancy grid.
struct FeatureGrid {
  int width = 0;
  int height = 0;
  int dim = 0;
  std::vector<float> features;  // row-major, `dim` values per cell
  BinaryMask observed;

  FeatureGrid() = default;
  FeatureGrid(int w, int h, int m);

  std::span<const float> feature(int row, int col) const {
    return {features.data() + (static_cast<std::size_t>(row) * width + col) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<float> feature(int row, int col) {
    return {features.data() + (static_cast<std::size_t>(row) * width + col) * dim, static_cast<std::size_t>(dim)};
  }
};

// FGRID binary format: "FGRID\0", u32 width, height, M (little endian),
// width*height*M f32 values, then width*height observed-flag bytes.
FeatureGrid read_feature_grid(std::istream& in, const std::string& source_name = "<stream>");
FeatureGrid load_feature_grid(const std::string& path);
void write_feature_grid(std::ostream& out, const FeatureGrid& fg);

struct TextEmbedding {
  std::vector<double> vector;
  std::string phrase;
};

// Lowercase, trim, and collapse internal whitespace runs to one space.
std::string normalize_phrase(std::string_view phrase);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // Throws UnknownPhrase when the phrase cannot be embedded.
  virtual TextEmbedding embed(std::string_view phrase) const = 0;
  virtual int dim() const = 0;
};

// Precomputed text embeddings keyed by normalized phrase.
class Vocabulary final : public EmbeddingProvider {
 public:
  Vocabulary() = default;

  void add(std::string_view phrase, std::vector<double> vector);
  bool contains(std::string_view phrase) const;
  std::size_t size() const { return entries_.size(); }

  TextEmbedding embed(std::string_view phrase) const override;
  int dim() const override { return dim_; }

  // UTF-8 lines `phrase<TAB>v1,v2,...,vM`. Blank lines and lines starting
  // with '#' are skipped.
  static Vocabulary read(std::istream& in, const std::string& source_name = "<stream>");
  static Vocabulary load(const std::string& path);
  void write(std::ostream& out) const;

 private:
  int dim_ = 0;
  std::map<std::string, std::vector<double>, std::less<>> entries_;
};

TextEmbedding embed(std::string_view phrase, const EmbeddingProvider& provider);

// Inner-product scores on observed cells. Unobserved cells hold 0 and are
// flagged off in `observed`.
struct ScoreMap {
  int width = 0;
  int height = 0;
  std::vector<double> scores;
  BinaryMask observed;

  double at(int row, int col) const { return scores[static_cast<std::size_t>(row) * width + col]; }
  std::vector<double> observed_scores() const;
};

ScoreMap score_map(const FeatureGrid& fg, const TextEmbedding& emb);

struct GmmModel {
  int k = 0;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stds;
  // Log-likelihood of the data after initialization and after every EM update.
  std::vector<double> log_likelihood;
  int iterations = 0;
  bool converged = false;

  // Index of the component with the highest mean (ties: higher index).
  int top_component() const;
  // argmax_i N(s; mu_i, sigma_i^2) with unweighted densities; ties go to the
  // higher-mean component.
  int classify(double score) const;
  // Two or more components with one shared mean: the scores carry no
  // stratum to single out, so nothing matches.
  bool degenerate() const;
  bool matches(double score) const { return !degenerate() && classify(score) == top_component(); }
};

struct GmmOptions {
  int max_iterations = 200;
  double tolerance = 1e-6;       // stop when the log-likelihood gains less than this
  double variance_floor = 1e-9;
};

// 1D EM. Means start at the sample quantiles i/(k-1) (min to max), weights uniform,
// variances at the global sample variance. Initialization has no random
// component, so `seed` does not change the result.
GmmModel fit_gmm(std::span<const double> samples, int k, std::uint64_t seed = 0, const GmmOptions& opts = {});
GmmModel fit_gmm(const ScoreMap& scores, int k, std::uint64_t seed = 0, const GmmOptions& opts = {});

BinaryMask match_mask(const ScoreMap& scores, const GmmModel& model);

struct CandidateWaypoint {
  WorldPose pose;
  GridIndex cell;
  int region_id = 0;
  double clearance = 0.0;
  int description_index = 0;

  friend bool operator==(const CandidateWaypoint&, const CandidateWaypoint&) = default;
};

enum class MaskFilter { OpenClose, None };

struct MapQueryParams {
  int k = 3;
  std::uint64_t seed = 0;
  std::optional<double> radius;  // meters; default 10 * grid resolution
  MaskFilter filter = MaskFilter::OpenClose;
  ObstaclePolicy clearance_policy = ObstaclePolicy::OccupiedAndUnknown;
};

// Everything computed for one description, for diagnostics and display.
struct MapQueryResult {
  TextEmbedding embedding;
  ScoreMap scores;
  GmmModel model;
  BinaryMask raw_mask;
  BinaryMask filtered_mask;
  std::vector<Region> regions;
  std::vector<CandidateWaypoint> candidates;
};

// Full pipeline. Throws UnknownPhrase, DimensionMismatch, TooFewSamples, or
// NoMatch when no region yields a free waypoint.
MapQueryResult query_map(std::string_view description, int description_index, const FeatureGrid& fg,
                         const OccupancyGrid& occ, const EmbeddingProvider& provider, const MapQueryParams& params);

std::vector<CandidateWaypoint> candidates_for(std::string_view description, int description_index,
                                              const FeatureGrid& fg, const OccupancyGrid& occ,
                                              const EmbeddingProvider& provider, const MapQueryParams& params);

}  // namespace lgnav
