#ifndef VIDEC_REPORT_HPP
#define VIDEC_REPORT_HPP

// Plain-text accuracy tables: one table per channel group, rows per dataset,
// columns per interval, cells "mean ± std" in percent.

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "videc/config.hpp"

namespace videc {

struct ReportCell {
  std::string dataset;
  std::string group;
  TimeWindow interval;
  double mean_accuracy = 0.0; // fraction
  double std_accuracy = 0.0;  // fraction
};

/// "25.9 ± 4.6"
inline std::string format_cell(double mean_pct, double std_pct) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f \xC2\xB1 %.1f", mean_pct, std_pct);
  return buf;
}

namespace detail {

/// Display width of UTF-8 text (counts code points).
inline std::size_t display_width(const std::string &s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    n += (c & 0xC0) != 0x80 ? 1 : 0;
  return n;
}

inline std::string pad(const std::string &s, std::size_t width) {
  const auto w = display_width(s);
  return s + std::string(width > w ? width - w : 0, ' ');
}

} // namespace detail

/// Renders every group in `groups` order; datasets in first-seen order. The
/// "Average" row is the mean over datasets of the cell means, ± their sample
/// standard deviation (0 for a single dataset).
inline std::string render_report(const std::vector<ReportCell> &cells, const std::vector<GroupSpec> &groups,
                                 const std::vector<TimeWindow> &intervals) {
  std::vector<std::string> datasets;
  for (const auto &c : cells)
    if (std::find(datasets.begin(), datasets.end(), c.dataset) == datasets.end())
      datasets.push_back(c.dataset);

  auto find = [&](const std::string &ds, const std::string &g, TimeWindow w) -> const ReportCell * {
    for (const auto &c : cells)
      if (c.dataset == ds && c.group == g && c.interval.start == w.start && c.interval.end == w.end)
        return &c;
    return nullptr;
  };

  std::size_t name_w = std::string("Average").size();
  for (const auto &d : datasets)
    name_w = std::max(name_w, detail::display_width(d));
  name_w += 2;
  constexpr std::size_t cell_w = 16;

  std::string out;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto &g = groups[gi];
    char title[160];
    std::snprintf(title, sizeof title, "Table %zu. Classification accuracy (%%), group %s (m = %d)\n", gi + 1,
                  g.name.c_str(), g.m);
    out += title;
    std::string header = detail::pad("Dataset", name_w);
    for (const auto &w : intervals)
      header += detail::pad(interval_header(w), cell_w);
    while (!header.empty() && header.back() == ' ')
      header.pop_back();
    out += header + "\n";

    std::vector<std::vector<double>> col_means(intervals.size());
    for (const auto &ds : datasets) {
      std::string row = detail::pad(ds, name_w);
      for (std::size_t wi = 0; wi < intervals.size(); ++wi) {
        const auto *c = find(ds, g.name, intervals[wi]);
        if (c) {
          row += detail::pad(format_cell(100.0 * c->mean_accuracy, 100.0 * c->std_accuracy), cell_w);
          col_means[wi].push_back(100.0 * c->mean_accuracy);
        } else {
          row += detail::pad("n/a", cell_w);
        }
      }
      while (!row.empty() && row.back() == ' ')
        row.pop_back();
      out += row + "\n";
    }
    std::string avg = detail::pad("Average", name_w);
    for (const auto &m : col_means)
      avg += detail::pad(m.empty() ? "n/a" : format_cell(mean_of(m), sample_std(m)), cell_w);
    while (!avg.empty() && avg.back() == ' ')
      avg.pop_back();
    out += avg + "\n";
    if (gi + 1 < groups.size())
      out += "\n";
  }
  return out;
}

} // namespace videc

#endif // VIDEC_REPORT_HPP
