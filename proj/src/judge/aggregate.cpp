#include <map>

#include "s2a/judge.hpp"

namespace s2a {

namespace {

struct Tally {
  Rational sum;
  std::size_t n = 0;
  void add(const Rational& v) {
    sum += v;
    ++n;
  }
  Rational mean() const { return sum / Rational(static_cast<long long>(n)); }
};

}  // namespace

MetricsReport aggregate(std::span<const Observation> observations, std::string strategy, std::string task_kind,
                        std::string metric) {
  MetricsReport report;
  report.strategy = std::move(strategy);
  report.task_kind = std::move(task_kind);
  report.metric = std::move(metric);

  std::map<std::int64_t, Tally> per_seed;
  std::map<std::int64_t, std::map<std::string, Tally>> per_seed_category;
  std::map<std::string, std::size_t> category_n;
  for (const auto& o : observations) {
    if (o.flagged) ++report.flagged;
    if (!o.value) {
      ++report.excluded;
      continue;
    }
    per_seed[o.seed].add(*o.value);
    per_seed_category[o.seed][o.category].add(*o.value);
    ++category_n[o.category];
    ++report.n;
  }
  if (report.n == 0) return report;
  report.empty = false;

  Tally overall;
  for (const auto& [seed, tally] : per_seed) {
    report.seeds.push_back(SeedValue{seed, tally.mean(), tally.n});
    overall.add(tally.mean());
  }
  report.overall = overall.mean();

  std::map<std::string, Tally> across_seeds;
  for (const auto& [seed, cats] : per_seed_category) {
    for (const auto& [cat, tally] : cats) across_seeds[cat].add(tally.mean());
  }
  for (const auto& [cat, tally] : across_seeds) report.by_category[cat] = Cell{tally.mean(), category_n[cat]};
  return report;
}

}  // namespace s2a
