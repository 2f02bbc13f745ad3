#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace sqa {

// Marker returned by correlations whose value is undefined (constant input,
// all pairs tied). Test with std::isnan.
inline constexpr double kDegenerate = std::numeric_limits<double>::quiet_NaN();

double mse(std::span<const double> pred, std::span<const double> label);

// Pearson correlation.
double lcc(std::span<const double> pred, std::span<const double> label);

// Fractional (average) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks.
double srcc(std::span<const double> pred, std::span<const double> label);

// Kendall tau-b, O(n log n) (Knight's merge-sort algorithm).
double ktau(std::span<const double> pred, std::span<const double> label);

struct SystemMeans {
  std::vector<std::string> system_ids;  // sorted
  std::vector<double> mean_pred;
  std::vector<double> mean_label;
};

// Per-system arithmetic means, ordered by system id.
SystemMeans system_aggregate(std::span<const double> pred, std::span<const double> label,
                             std::span<const std::string> system_ids);

struct MetricBlock {
  double mse = 0.0;
  double lcc = 0.0;
  double srcc = 0.0;
  double ktau = 0.0;
};

struct MetricReport {
  MetricBlock utterance;
  MetricBlock system;
  std::size_t n_utterances = 0;
  std::size_t n_systems = 0;
};

MetricBlock metric_block(std::span<const double> pred, std::span<const double> label);

MetricReport full_report(std::span<const double> pred, std::span<const double> label,
                         std::span<const std::string> system_ids);

// Column order of the report CSV.
inline constexpr const char* kReportCsvHeader =
    "utt_mse,utt_lcc,utt_srcc,utt_ktau,sys_mse,sys_lcc,sys_srcc,sys_ktau";

// Header line plus one row of shortest round-trip decimals ("nan" for
// degenerate values).
std::string report_to_csv(const MetricReport& report);
MetricReport report_from_csv(const std::string& text);

// Aligned human-readable table with three decimals.
std::string report_to_table(const MetricReport& report);

}  // namespace sqa
