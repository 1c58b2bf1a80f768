#include "clickstream/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "clickstream/errors.hpp"
#include "clickstream/random.hpp"

namespace clickstream {

void PrepConfig::validate() const {
  if (min_len < 1) throw InvalidSpec("min_len must be >= 1");
  if (max_len < min_len) throw InvalidSpec("max_len must be >= min_len");
  const double sum = split.train + split.validation + split.test;
  if (split.train < 0 || split.validation < 0 || split.test < 0 ||
      std::abs(sum - 1.0) > 1e-9) {
    throw InvalidSpec("split fractions must be non-negative and sum to 1");
  }
}

SymbolizedSession cut_before_first_buy(const SymbolizedSession& s) {
  if (s.label != Label::Buy) return s;
  SymbolizedSession out = s;
  const auto it = std::find(out.symbols.begin(), out.symbols.end(),
                            static_cast<Token>(code(EventType::Buy)));
  out.symbols.erase(it, out.symbols.end());
  return out;
}

SplitSizes split_sizes(std::size_t n, const SplitFractions& f) {
  // The epsilon absorbs representation error, e.g. 0.7 * 10 = 6.999...
  const auto part = [n](double frac) {
    return static_cast<std::size_t>(std::floor(frac * static_cast<double>(n) + 1e-9));
  };
  SplitSizes s;
  s.train = std::min(part(f.train), n);
  s.validation = std::min(part(f.validation), n - s.train);
  s.test = n - s.train - s.validation;
  return s;
}

namespace {

SessionList downsample(SessionList sessions, std::size_t keep, Rng& rng) {
  std::vector<std::size_t> idx(sessions.size());
  std::iota(idx.begin(), idx.end(), 0);
  shuffle(idx, rng);
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  SessionList out;
  out.reserve(keep);
  for (auto i : idx) out.push_back(std::move(sessions[i]));
  return out;
}

void split_class(SessionList sessions, const SplitFractions& f, Rng& rng,
                 Corpus& corpus) {
  shuffle(sessions, rng);
  const auto sizes = split_sizes(sessions.size(), f);
  auto it = std::make_move_iterator(sessions.begin());
  corpus.train.insert(corpus.train.end(), it, it + sizes.train);
  it += sizes.train;
  corpus.validation.insert(corpus.validation.end(), it, it + sizes.validation);
  it += sizes.validation;
  corpus.test.insert(corpus.test.end(), it, std::make_move_iterator(sessions.end()));
}

}  // namespace

Corpus prepare(const SessionList& sessions, const PrepConfig& cfg) {
  cfg.validate();
  Corpus corpus;
  auto& log = corpus.prep_log;
  log.input_total = sessions.size();

  SessionList buy;
  SessionList nobuy;
  for (const auto& s : sessions) {
    if (!s.label) throw FormatError("session '" + s.id + "' has no label");
    if (s.length() < cfg.min_len) {
      ++log.dropped_short;
      continue;
    }
    if (s.length() > cfg.max_len) {
      ++log.dropped_long;
      continue;
    }
    SymbolizedSession cut = cut_before_first_buy(s);
    if (cut.length() != s.length()) ++log.cut;
    if (cut.length() < cfg.min_len) {
      ++log.dropped_after_cut;
      continue;
    }
    (*cut.label == Label::Buy ? buy : nobuy).push_back(std::move(cut));
  }
  log.buy_after_filter = buy.size();
  log.nobuy_after_filter = nobuy.size();
  if (buy.empty() || nobuy.empty()) {
    throw InsufficientData("need both classes after filtering (BUY=" +
                           std::to_string(buy.size()) +
                           ", NOBUY=" + std::to_string(nobuy.size()) + ")");
  }

  Rng rng(cfg.seed);
  const std::size_t minority = std::min(buy.size(), nobuy.size());
  log.downsampled = buy.size() + nobuy.size() - 2 * minority;
  if (buy.size() > minority) buy = downsample(std::move(buy), minority, rng);
  if (nobuy.size() > minority) nobuy = downsample(std::move(nobuy), minority, rng);

  split_class(std::move(buy), cfg.split, rng, corpus);
  split_class(std::move(nobuy), cfg.split, rng, corpus);
  return corpus;
}

std::size_t nearest_rank_percentile(const std::vector<std::size_t>& sorted,
                                    double p) {
  if (sorted.empty()) throw EmptyInput("no values");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

LabelStats compute_label_stats(const SessionList& sessions) {
  if (sessions.empty()) throw EmptyInput("no sessions");
  LabelStats st;
  std::vector<std::size_t> lengths;
  lengths.reserve(sessions.size());
  Eigen::Matrix<double, kNumEventTypes, kNumEventTypes> bigrams =
      Eigen::Matrix<double, kNumEventTypes, kNumEventTypes>::Zero();
  for (const auto& s : sessions) {
    lengths.push_back(s.length());
    for (std::size_t i = 0; i < s.symbols.size(); ++i) {
      const int cur = s.symbols[i] - 1;
      st.event_counts(cur) += 1.0;
      if (i > 0) bigrams(s.symbols[i - 1] - 1, cur) += 1.0;
    }
  }
  std::sort(lengths.begin(), lengths.end());

  auto& L = st.lengths;
  L.sessions = sessions.size();
  L.events = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
  const std::array<double, 5> ps = {0, 25, 50, 75, 100};
  for (std::size_t i = 0; i < ps.size(); ++i) {
    L.percentiles[i] = nearest_rank_percentile(lengths, ps[i]);
  }
  const double n = static_cast<double>(lengths.size());
  L.mean = static_cast<double>(L.events) / n;
  double ss = 0.0;
  for (auto len : lengths) {
    const double d = static_cast<double>(len) - L.mean;
    ss += d * d;
  }
  L.sd = std::sqrt(ss / n);

  if (L.events > 0) st.event_freq = st.event_counts / static_cast<double>(L.events);
  for (int r = 0; r < kNumEventTypes; ++r) {
    const double row = bigrams.row(r).sum();
    st.empty_rows[r] = row == 0.0;
    if (row > 0.0) st.transitions.row(r) = bigrams.row(r) / row;
  }
  return st;
}

CorpusStats compute_stats(const SessionList& sessions) {
  if (sessions.empty()) throw EmptyInput("no sessions");
  CorpusStats stats;
  stats.all = compute_label_stats(sessions);
  const auto buy = filter_label(sessions, Label::Buy);
  const auto nobuy = filter_label(sessions, Label::NoBuy);
  if (!buy.empty()) stats.buy = compute_label_stats(buy);
  if (!nobuy.empty()) stats.nobuy = compute_label_stats(nobuy);
  if (stats.buy && stats.nobuy) {
    stats.transition_diff = TransitionMatrix(stats.buy->transitions - stats.nobuy->transitions);
  }
  return stats;
}

namespace {

nlohmann::json matrix_json(const TransitionMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json label_json(const LabelStats& st) {
  nlohmann::json j;
  const auto& L = st.lengths;
  j["sessions"] = L.sessions;
  j["events"] = L.events;
  j["length_percentiles"] = {{"p0", L.percentiles[0]},
                             {"p25", L.percentiles[1]},
                             {"p50", L.percentiles[2]},
                             {"p75", L.percentiles[3]},
                             {"p100", L.percentiles[4]}};
  j["length_mean"] = L.mean;
  j["length_sd"] = L.sd;
  nlohmann::json dist = nlohmann::json::object();
  for (auto e : kAllEventTypes) {
    dist[std::string(name(e))] = {{"count", st.event_counts(code(e) - 1)},
                                  {"freq", st.event_freq(code(e) - 1)}};
  }
  j["event_distribution"] = std::move(dist);
  j["transitions"] = matrix_json(st.transitions);
  nlohmann::json empty = nlohmann::json::array();
  for (auto e : kAllEventTypes) {
    if (st.empty_rows[code(e) - 1]) empty.push_back(name(e));
  }
  j["empty_transition_rows"] = std::move(empty);
  return j;
}

}  // namespace

nlohmann::json stats_to_json(const CorpusStats& stats) {
  nlohmann::json j;
  nlohmann::json order = nlohmann::json::array();
  for (auto e : kAllEventTypes) order.push_back(name(e));
  j["event_order"] = std::move(order);
  j["ALL"] = label_json(stats.all);
  if (stats.buy) j["BUY"] = label_json(*stats.buy);
  if (stats.nobuy) j["NOBUY"] = label_json(*stats.nobuy);
  if (stats.transition_diff) j["transition_diff_buy_minus_nobuy"] = matrix_json(*stats.transition_diff);
  return j;
}

}  // namespace clickstream
