#include <algorithm>
#include <cmath>
#include <numeric>

#include "amlgnn/error.hpp"
#include "amlgnn/evaluator.hpp"
#include "amlgnn/rng.hpp"

namespace amlgnn {

namespace {

void check_set(const ScoredSet& s) {
  if (s.score.size() != s.positive.size() || s.score.empty()) {
    throw Error(ErrorKind::ShapeMismatch, "scored set needs equal, non-zero lengths");
  }
}

// Indices ordered by descending score.
std::vector<std::size_t> descending(const ScoredSet& s) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.score[a] > s.score[b]; });
  return order;
}

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

// Shifted by the first value so identical inputs give exactly std 0.
Moments moments(const std::vector<double>& xs) {
  const double x0 = xs.front();
  double s = 0.0;
  for (double x : xs) s += x - x0;
  const double shift = s / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - x0 - shift) * (x - x0 - shift);
  return {x0 + shift, std::sqrt(ss / static_cast<double>(xs.size()))};
}

}  // namespace

std::size_t ScoredSet::num_positive() const {
  return static_cast<std::size_t>(std::count(positive.begin(), positive.end(), 1));
}

double auprc(const ScoredSet& s) {
  check_set(s);
  const std::size_t total_pos = s.num_positive();
  if (total_pos == 0) throw Error(ErrorKind::NoPositives, "average precision needs a positive");
  const auto order = descending(s);
  double ap = 0.0;
  std::size_t tp = 0, seen = 0, prev_tp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double v = s.score[order[k]];
    while (k < order.size() && s.score[order[k]] == v) {
      tp += s.positive[order[k]];
      ++seen;
      ++k;
    }
    if (tp != prev_tp) {
      ap += (static_cast<double>(tp - prev_tp) / static_cast<double>(total_pos)) *
            (static_cast<double>(tp) / static_cast<double>(seen));
      prev_tp = tp;
    }
  }
  return ap;
}

double auc_roc(const ScoredSet& s) {
  check_set(s);
  const std::size_t pos = s.num_positive();
  const std::size_t neg = s.size() - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorKind::SingleClass, "AUC needs both classes");
  auto order = descending(s);
  std::reverse(order.begin(), order.end());  // ascending
  // Twice the Mann-Whitney count, kept integral.
  std::uint64_t twice = 0;
  std::uint64_t neg_below = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double v = s.score[order[k]];
    std::uint64_t p_g = 0, n_g = 0;
    while (k < order.size() && s.score[order[k]] == v) {
      (s.positive[order[k]] ? p_g : n_g) += 1;
      ++k;
    }
    twice += 2 * p_g * neg_below + p_g * n_g;
    neg_below += n_g;
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

BootstrapStats bootstrap_eval(const ScoredSet& scored, int n_rounds, double frac,
                              std::uint64_t seed) {
  check_set(scored);
  if (n_rounds < 1) throw Error(ErrorKind::BadFraction, "n_rounds must be >= 1");
  if (!(frac > 0.0 && frac <= 1.0)) throw Error(ErrorKind::BadFraction, "frac must lie in (0, 1]");
  const std::size_t n = scored.size();
  const auto k = static_cast<std::size_t>(std::floor(frac * static_cast<double>(n)));
  std::vector<double> aps, aucs;
  const Rng root(seed);
  std::vector<std::size_t> perm(n);
  ScoredSet draw;
  for (int r = 0; r < n_rounds; ++r) {
    Rng rng = root.split(static_cast<std::uint64_t>(r));
    bool ok = false;
    for (int attempt = 0; attempt <= kBootstrapRetryCap && !ok; ++attempt) {
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = 0; i < k; ++i) std::swap(perm[i], perm[i + rng.below(n - i)]);
      draw.score.resize(k);
      draw.positive.resize(k);
      std::size_t pos = 0;
      for (std::size_t i = 0; i < k; ++i) {
        draw.score[i] = scored.score[perm[i]];
        draw.positive[i] = scored.positive[perm[i]];
        pos += draw.positive[i];
      }
      ok = pos > 0 && pos < k;
    }
    if (!ok) {
      throw Error(ErrorKind::DegenerateSet, "no two-class subsample after " +
                                                std::to_string(kBootstrapRetryCap) + " redraws");
    }
    aps.push_back(auprc(draw));
    aucs.push_back(auc_roc(draw));
  }
  const auto ap = moments(aps);
  const auto auc = moments(aucs);
  return {ap.mean, ap.std, auc.mean, auc.std, n_rounds, frac, seed};
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw Error(ErrorKind::ShapeMismatch, "percentile of an empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

ThresholdMetrics metrics_at_threshold(const ScoredSet& scored, double threshold) {
  check_set(scored);
  ThresholdMetrics m;
  m.threshold_value = threshold;
  m.support = scored.num_positive();
  std::size_t tp = 0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (scored.score[i] >= threshold) {
      ++m.flagged;
      tp += scored.positive[i];
    }
  }
  // Zero divisions yield 0 and mark the record degenerate.
  if (m.flagged > 0) {
    m.precision = static_cast<double>(tp) / static_cast<double>(m.flagged);
  } else {
    m.degenerate = true;
  }
  if (m.support > 0) {
    m.recall = static_cast<double>(tp) / static_cast<double>(m.support);
  } else {
    m.degenerate = true;
  }
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.degenerate = true;
  }
  return m;
}

std::vector<ThresholdMetrics> percentile_thresholds(const ScoredSet& scored,
                                                    std::span<const double> percentiles) {
  check_set(scored);
  std::vector<ThresholdMetrics> out;
  for (double p : percentiles) {
    auto m = metrics_at_threshold(scored, percentile(scored.score, p));
    m.percentile = p;
    out.push_back(m);
  }
  return out;
}

}  // namespace amlgnn
