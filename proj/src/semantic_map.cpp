#include "lgnav/semantic_map.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

#include "lgnav/errors.hpp"

namespace lgnav {

namespace {

constexpr char kFgridMagic[6] = {'F', 'G', 'R', 'I', 'D', '\0'};

std::uint32_t read_u32(std::istream& in, const std::string& name) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ConfigError(name, 0, "truncated feature grid header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

}  // namespace

FeatureGrid::FeatureGrid(int w, int h, int m)
    : width(w), height(h), dim(m), features(static_cast<std::size_t>(w) * h * m, 0.0f), observed(w, h, true) {}

FeatureGrid read_feature_grid(std::istream& in, const std::string& source_name) {
  char magic[6];
  if (!in.read(magic, 6) || std::memcmp(magic, kFgridMagic, 6) != 0)
    throw ConfigError(source_name, 0, "missing FGRID magic");
  const std::uint32_t w = read_u32(in, source_name);
  const std::uint32_t h = read_u32(in, source_name);
  const std::uint32_t m = read_u32(in, source_name);
  if (w == 0 || h == 0 || m == 0 || w > 1u << 15 || h > 1u << 15 || m > 1u << 16)
    throw ConfigError(source_name, 0, "implausible feature grid dimensions");

  FeatureGrid fg(static_cast<int>(w), static_cast<int>(h), static_cast<int>(m));
  for (float& v : fg.features) {
    const std::uint32_t raw = read_u32(in, source_name);
    v = std::bit_cast<float>(raw);
  }
  std::vector<char> flags(static_cast<std::size_t>(w) * h);
  if (!in.read(flags.data(), static_cast<std::streamsize>(flags.size())))
    throw ConfigError(source_name, 0, "truncated observed-flag block");
  for (std::size_t k = 0; k < flags.size(); ++k) fg.observed.bits[k] = flags[k] != 0 ? 1 : 0;

  for (int r = 0; r < fg.height; ++r)
    for (int c = 0; c < fg.width; ++c)
      if (fg.observed.at(r, c))
        for (float v : fg.feature(r, c))
          if (!std::isfinite(v)) throw ConfigError(source_name, 0, "non-finite feature on an observed cell");
  return fg;
}

FeatureGrid load_feature_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, "cannot open feature grid");
  return read_feature_grid(in, path);
}

void write_feature_grid(std::ostream& out, const FeatureGrid& fg) {
  out.write(kFgridMagic, 6);
  write_u32(out, static_cast<std::uint32_t>(fg.width));
  write_u32(out, static_cast<std::uint32_t>(fg.height));
  write_u32(out, static_cast<std::uint32_t>(fg.dim));
  for (float v : fg.features) write_u32(out, std::bit_cast<std::uint32_t>(v));
  for (std::uint8_t b : fg.observed.bits) out.put(static_cast<char>(b ? 1 : 0));
}

std::string normalize_phrase(std::string_view phrase) {
  std::string out;
  out.reserve(phrase.size());
  bool pending_space = false;
  for (char ch : phrase) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isspace(u)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

void Vocabulary::add(std::string_view phrase, std::vector<double> vector) {
  if (vector.empty()) throw Error("embedding must have at least one dimension");
  if (dim_ != 0 && static_cast<int>(vector.size()) != dim_)
    throw DimensionMismatch("embedding dimension " + std::to_string(vector.size()) + " differs from vocabulary dimension " +
                            std::to_string(dim_));
  for (double v : vector)
    if (!std::isfinite(v)) throw Error("embedding entries must be finite");
  dim_ = static_cast<int>(vector.size());
  entries_[normalize_phrase(phrase)] = std::move(vector);
}

bool Vocabulary::contains(std::string_view phrase) const { return entries_.contains(normalize_phrase(phrase)); }

TextEmbedding Vocabulary::embed(std::string_view phrase) const {
  const std::string key = normalize_phrase(phrase);
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw UnknownPhrase(std::string(phrase));
  return TextEmbedding{it->second, key};
}

Vocabulary Vocabulary::read(std::istream& in, const std::string& source_name) {
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ConfigError(source_name, line_no, "expected 'phrase<TAB>v1,...,vM'");
    const std::string phrase = line.substr(0, tab);
    if (normalize_phrase(phrase).empty()) throw ConfigError(source_name, line_no, "empty phrase");
    std::vector<double> values;
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    while (true) {
      const auto comma = rest.find(',');
      std::string_view tok = rest.substr(0, comma);
      while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
      while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
      double v = 0.0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ConfigError(source_name, line_no, "invalid number '" + std::string(tok) + "'");
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (vocab.contains(phrase)) throw ConfigError(source_name, line_no, "duplicate phrase '" + phrase + "'");
    try {
      vocab.add(phrase, std::move(values));
    } catch (const Error& e) {
      throw ConfigError(source_name, line_no, e.what());
    }
  }
  return vocab;
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open vocabulary");
  return read(in, path);
}

void Vocabulary::write(std::ostream& out) const {
  for (const auto& [phrase, vec] : entries_) {
    out << phrase << '\t';
    for (std::size_t i = 0; i < vec.size(); ++i) {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, vec[i]);
      if (i) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

TextEmbedding embed(std::string_view phrase, const EmbeddingProvider& provider) {
  TextEmbedding e = provider.embed(phrase);
  if (static_cast<int>(e.vector.size()) != provider.dim())
    throw DimensionMismatch("provider returned an embedding of the wrong dimension");
  return e;
}

std::vector<double> ScoreMap::observed_scores() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < scores.size(); ++k)
    if (observed.bits[k]) out.push_back(scores[k]);
  return out;
}

ScoreMap score_map(const FeatureGrid& fg, const TextEmbedding& emb) {
  if (static_cast<int>(emb.vector.size()) != fg.dim)
    throw DimensionMismatch("embedding has dimension " + std::to_string(emb.vector.size()) + ", feature grid has " +
                            std::to_string(fg.dim));
  ScoreMap s;
  s.width = fg.width;
  s.height = fg.height;
  s.scores.assign(static_cast<std::size_t>(fg.width) * fg.height, 0.0);
  s.observed = fg.observed;
  for (int r = 0; r < fg.height; ++r) {
    for (int c = 0; c < fg.width; ++c) {
      if (!fg.observed.at(r, c)) continue;
      const auto f = fg.feature(r, c);
      double acc = 0.0;
      for (int i = 0; i < fg.dim; ++i) acc += static_cast<double>(f[i]) * emb.vector[i];
      s.scores[static_cast<std::size_t>(r) * fg.width + c] = acc;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Gaussian mixture

namespace {

double log_normal(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
}

// E-step: fills responsibilities (n x k, row-major) and returns the total log-likelihood.
double expectation(std::span<const double> x, const GmmModel& m, const std::vector<double>& vars,
                   std::vector<double>& resp) {
  const int k = m.k;
  std::vector<double> logp(k);
  double ll = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      logp[i] = m.weights[i] > 0.0 ? std::log(m.weights[i]) + log_normal(x[n], m.means[i], vars[i])
                                   : -std::numeric_limits<double>::infinity();
      best = std::max(best, logp[i]);
    }
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += std::exp(logp[i] - best);
    const double lse = best + std::log(sum);
    ll += lse;
    for (int i = 0; i < k; ++i) resp[n * k + i] = std::exp(logp[i] - lse);
  }
  return ll;
}

}  // namespace

int GmmModel::top_component() const {
  int top = 0;
  for (int i = 1; i < k; ++i)
    if (means[i] >= means[top]) top = i;
  return top;
}

bool GmmModel::degenerate() const {
  if (k < 2) return false;
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  return *hi - *lo <= 1e-12 * (1.0 + std::max(std::abs(*lo), std::abs(*hi)));
}

int GmmModel::classify(double score) const {
  // Rank components by (mean, index) so density ties resolve toward the higher mean.
  auto higher_rank = [&](int a, int b) { return means[a] > means[b] || (means[a] == means[b] && a > b); };
  int best = 0;
  double best_ld = log_normal(score, means[0], stds[0] * stds[0]);
  for (int i = 1; i < k; ++i) {
    const double ld = log_normal(score, means[i], stds[i] * stds[i]);
    if (ld > best_ld || (ld == best_ld && higher_rank(i, best))) {
      best = i;
      best_ld = ld;
    }
  }
  return best;
}

GmmModel fit_gmm(std::span<const double> samples, int k, std::uint64_t /*seed*/, const GmmOptions& opts) {
  if (k < 1) throw Error("GMM needs at least one component");
  if (samples.size() < static_cast<std::size_t>(k))
    throw TooFewSamples("GMM with " + std::to_string(k) + " components needs at least that many samples, got " +
                        std::to_string(samples.size()));
  const std::size_t n = samples.size();
  const double nd = static_cast<double>(n);

  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= nd;
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  var = std::max(var / nd, opts.variance_floor);

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  GmmModel m;
  m.k = k;
  m.weights.assign(k, 1.0 / k);
  m.means.resize(k);
  std::vector<double> vars(k, var);
  // Quantiles i/(k-1), so the outer components start on the extremes and a
  // small high-scoring population gets its own component from the outset.
  for (int i = 0; i < k; ++i) {
    const double pos = k == 1 ? 0.5 : static_cast<double>(i) / (k - 1);
    m.means[i] = sorted[static_cast<std::size_t>(std::llround(pos * static_cast<double>(n - 1)))];
  }

  std::vector<double> resp(n * k);
  double ll = expectation(samples, m, vars, resp);
  m.log_likelihood.push_back(ll);

  for (int it = 0; it < opts.max_iterations; ++it) {
    for (int i = 0; i < k; ++i) {
      double nk = 0.0;
      double sx = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        nk += resp[j * k + i];
        sx += resp[j * k + i] * samples[j];
      }
      if (nk <= 0.0) {
        // Component lost all support; it keeps its shape and drops out of the mixture.
        m.weights[i] = 0.0;
        continue;
      }
      const double mu = sx / nk;
      double sv = 0.0;
      for (std::size_t j = 0; j < n; ++j) sv += resp[j * k + i] * (samples[j] - mu) * (samples[j] - mu);
      m.weights[i] = nk / nd;
      m.means[i] = mu;
      vars[i] = std::max(sv / nk, opts.variance_floor);
    }
    double wsum = 0.0;
    for (double w : m.weights) wsum += w;
    for (double& w : m.weights) w /= wsum;

    const double next = expectation(samples, m, vars, resp);
    m.log_likelihood.push_back(next);
    m.iterations = it + 1;
    const double gain = next - ll;
    ll = next;
    if (gain < opts.tolerance) {
      m.converged = true;
      break;
    }
  }

  m.stds.resize(k);
  for (int i = 0; i < k; ++i) m.stds[i] = std::sqrt(vars[i]);
  return m;
}

GmmModel fit_gmm(const ScoreMap& scores, int k, std::uint64_t seed, const GmmOptions& opts) {
  const std::vector<double> s = scores.observed_scores();
  return fit_gmm(std::span<const double>(s), k, seed, opts);
}

BinaryMask match_mask(const ScoreMap& scores, const GmmModel& model) {
  BinaryMask mask(scores.width, scores.height);
  for (std::size_t k = 0; k < scores.scores.size(); ++k)
    mask.bits[k] = (scores.observed.bits[k] && model.matches(scores.scores[k])) ? 1 : 0;
  return mask;
}

// ---------------------------------------------------------------------------
// Candidate extraction

MapQueryResult query_map(std::string_view description, int description_index, const FeatureGrid& fg,
                         const OccupancyGrid& occ, const EmbeddingProvider& provider, const MapQueryParams& params) {
  if (fg.width != occ.width() || fg.height != occ.height())
    throw DimensionMismatch("feature grid and occupancy grid dimensions differ");

  MapQueryResult res;
  res.embedding = embed(description, provider);
  res.scores = score_map(fg, res.embedding);
  res.model = fit_gmm(res.scores, params.k, params.seed);
  res.raw_mask = match_mask(res.scores, res.model);
  res.filtered_mask = params.filter == MaskFilter::OpenClose ? close(open(res.raw_mask)) : res.raw_mask;
  res.regions = connected_components(res.filtered_mask);
  if (res.regions.empty()) throw NoMatch(std::string(description));

  const double radius = params.radius.value_or(10.0 * occ.resolution());
  const double limit = radius * (1.0 + 1e-12);
  const ClearanceMap clearance = distance_transform(occ, params.clearance_policy);

  for (std::size_t id = 0; id < res.regions.size(); ++id) {
    BinaryMask region_mask(occ.width(), occ.height());
    for (const GridIndex& g : res.regions[id]) region_mask.set(g, true);
    const ClearanceMap reach = distance_transform(region_mask, occ.resolution());

    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < occ.size(); ++k) {
      if (occ.cells()[k] != Cell::Free || !(reach.clearance[k] <= limit)) continue;
      // Strictly greater keeps the lowest row-major index among ties.
      if (!best || clearance.clearance[k] > clearance.clearance[*best]) best = k;
    }
    if (!best) continue;
    CandidateWaypoint cw;
    cw.cell = occ.unflat(*best);
    cw.pose = grid_to_world(cw.cell, occ);
    cw.region_id = static_cast<int>(id);
    cw.clearance = clearance.clearance[*best];
    cw.description_index = description_index;
    res.candidates.push_back(cw);
  }
  if (res.candidates.empty()) throw NoMatch(std::string(description));
  return res;
}

std::vector<CandidateWaypoint> candidates_for(std::string_view description, int description_index,
                                              const FeatureGrid& fg, const OccupancyGrid& occ,
                                              const EmbeddingProvider& provider, const MapQueryParams& params) {
  return query_map(description, description_index, fg, occ, provider, params).candidates;
}

}  // namespace lgnav
