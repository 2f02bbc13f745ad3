#include "sqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "sqa/error.hpp"
#include "sqa/manifest.hpp"
#include "sqa/text.hpp"

namespace sqa {
namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.empty()) throw InvalidArgument("metric on empty input");
  if (a.size() != b.size()) {
    throw DimensionError("metric inputs differ in length (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw InvalidArgument("metric input is not finite");
  }
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return kDegenerate;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return kDegenerate;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Sorts `v` in place and returns the number of strict inversions.
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo,
                         std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, scratch, lo, mid) + merge_count(v, scratch, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

// Sum of t(t-1)/2 over runs of equal values in a sorted range.
template <typename Eq>
std::int64_t tied_pairs(std::size_t n, Eq equal) {
  std::int64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      total += static_cast<std::int64_t>(run) * static_cast<std::int64_t>(run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

std::string cell(double v) { return std::isnan(v) ? std::string("nan") : format_exact(v); }

}  // namespace

double mse(std::span<const double> pred, std::span<const double> label) {
  check_pair(pred, label);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - label[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

double lcc(std::span<const double> pred, std::span<const double> label) {
  check_pair(pred, label);
  return pearson(pred, label);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Ranks i+1..j share their mean.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double srcc(std::span<const double> pred, std::span<const double> label) {
  check_pair(pred, label);
  const auto rp = average_ranks(pred);
  const auto rl = average_ranks(label);
  return pearson(rp, rl);
}

double ktau(std::span<const double> pred, std::span<const double> label) {
  check_pair(pred, label);
  const std::size_t n = pred.size();
  if (n < 2) return kDegenerate;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pred[a] != pred[b] ? pred[a] < pred[b] : label[a] < label[b];
  });
  const std::int64_t pairs = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t tied_x = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return pred[order[a]] == pred[order[b]];
  });
  const std::int64_t tied_xy = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return pred[order[a]] == pred[order[b]] && label[order[a]] == label[order[b]];
  });

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = label[order[i]];
  std::vector<double> scratch(n);
  const std::int64_t swaps = merge_count(y, scratch, 0, n);
  const std::int64_t tied_y = tied_pairs(n, [&](std::size_t a, std::size_t b) { return y[a] == y[b]; });

  const std::int64_t nx = pairs - tied_x;
  const std::int64_t ny = pairs - tied_y;
  if (nx == 0 || ny == 0) return kDegenerate;
  const std::int64_t numer = pairs - tied_x - tied_y + tied_xy - 2 * swaps;
  const double tau = static_cast<double>(numer) / std::sqrt(static_cast<double>(nx) * static_cast<double>(ny));
  return std::clamp(tau, -1.0, 1.0);
}

SystemMeans system_aggregate(std::span<const double> pred, std::span<const double> label,
                             std::span<const std::string> system_ids) {
  check_pair(pred, label);
  if (system_ids.size() != pred.size()) throw DimensionError("system id count differs from predictions");
  struct Acc {
    double pred = 0.0;
    double label = 0.0;
    std::size_t count = 0;
  };
  std::map<std::string, Acc> groups;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (system_ids[i].empty()) throw InvalidArgument("utterance " + std::to_string(i) + " has no system id");
    auto& g = groups[system_ids[i]];
    g.pred += pred[i];
    g.label += label[i];
    ++g.count;
  }
  SystemMeans out;
  for (const auto& [id, g] : groups) {
    out.system_ids.push_back(id);
    out.mean_pred.push_back(g.pred / static_cast<double>(g.count));
    out.mean_label.push_back(g.label / static_cast<double>(g.count));
  }
  return out;
}

MetricBlock metric_block(std::span<const double> pred, std::span<const double> label) {
  return {mse(pred, label), lcc(pred, label), srcc(pred, label), ktau(pred, label)};
}

MetricReport full_report(std::span<const double> pred, std::span<const double> label,
                         std::span<const std::string> system_ids) {
  MetricReport report;
  report.utterance = metric_block(pred, label);
  const auto sys = system_aggregate(pred, label, system_ids);
  report.system = metric_block(sys.mean_pred, sys.mean_label);
  report.n_utterances = pred.size();
  report.n_systems = sys.system_ids.size();
  return report;
}

std::string report_to_csv(const MetricReport& r) {
  std::ostringstream out;
  out << kReportCsvHeader << '\n'
      << cell(r.utterance.mse) << ',' << cell(r.utterance.lcc) << ',' << cell(r.utterance.srcc) << ','
      << cell(r.utterance.ktau) << ',' << cell(r.system.mse) << ',' << cell(r.system.lcc) << ','
      << cell(r.system.srcc) << ',' << cell(r.system.ktau) << '\n';
  return out.str();
}

MetricReport report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  std::string row;
  if (!std::getline(in, header) || header != kReportCsvHeader || !std::getline(in, row)) {
    throw FormatError("report CSV: unexpected layout");
  }
  const auto cells = split_csv_line(row);
  if (cells.size() != 8) throw FormatError("report CSV: expected 8 values");
  std::vector<double> v;
  for (const auto& c : cells) v.push_back(c == "nan" ? kDegenerate : parse_double(c, "report value"));
  MetricReport r;
  r.utterance = {v[0], v[1], v[2], v[3]};
  r.system = {v[4], v[5], v[6], v[7]};
  return r;
}

std::string report_to_table(const MetricReport& r) {
  auto fmt = [](double v) {
    char buf[32];
    if (std::isnan(v)) {
      std::snprintf(buf, sizeof buf, "%8s", "n/a");
    } else {
      std::snprintf(buf, sizeof buf, "%8.3f", v);
    }
    return std::string(buf);
  };
  std::ostringstream out;
  out << "level     " << "     MSE" << "     LCC" << "    SRCC" << "    KTAU" << '\n';
  out << "utterance " << fmt(r.utterance.mse) << fmt(r.utterance.lcc) << fmt(r.utterance.srcc)
      << fmt(r.utterance.ktau) << "   (n=" << r.n_utterances << ")\n";
  out << "system    " << fmt(r.system.mse) << fmt(r.system.lcc) << fmt(r.system.srcc) << fmt(r.system.ktau)
      << "   (n=" << r.n_systems << ")\n";
  return out.str();
}

}  // namespace sqa
