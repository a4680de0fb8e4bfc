#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecr/learner.hpp"
#include "ecr/policy.hpp"

namespace ecr {

/// One port's counters for an episode (or their average over episodes).
struct PortRow {
  std::string port;
  std::string region;
  double total = 0;  // ordered containers
  double failed = 0;
  double imported_laden = 0;
  double imported_empty = 0;
  double exported_laden = 0;
  double exported_empty = 0;
  double ratio = 1;  // (total - failed) / total, 1 when total is 0

  bool operator==(const PortRow&) const = default;
};

struct EpisodeReport {
  std::string policy;
  uint64_t seed = 0;
  double fulfillment_ratio = 1;
  std::vector<PortRow> ports;

  bool operator==(const EpisodeReport&) const = default;
};

/// (ordered - failed) / ordered; 1 when nothing was ordered.
double ratio_of(double ordered, double failed);

EpisodeReport make_report(const Engine& engine, const std::string& policy, uint64_t seed);

struct RunSummary {
  std::string policy;
  size_t episodes = 0;
  double mean = 0;
  std::optional<double> stddev;  // sample deviation, present when episodes >= 2
};

/// Mean of per-episode ratios.
RunSummary summarize(const std::string& policy, const std::vector<EpisodeReport>& reports);

/// "95.97 ± 0.63" style, in percent with two decimals.
std::string format_percent(const RunSummary& s);

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

struct Evaluation {
  RunSummary summary;
  std::vector<EpisodeReport> episodes;
};

/// Worker count: `requested` if positive, else hardware concurrency; capped by
/// ECR_LAB_THREADS when set.
int worker_count(int requested = 0);

/// One episode per seed, orders drawn with that seed; episodes spread over
/// worker threads, each with its own policy instance. Results are in seed order.
Evaluation run_evaluation(std::shared_ptr<const World> world, const DemandModel& model,
                          const PolicyFactory& make_policy, const std::vector<uint64_t>& seeds,
                          int threads = 0);

/// Seeds from the odd (evaluation) streams of `base`.
std::vector<uint64_t> evaluation_seeds(uint64_t base, int count);

struct SweepRow {
  int k = 0;
  RunSummary summary;
};

/// Evaluates a diplomatic bundle with staleness_k set to each value in turn.
std::vector<SweepRow> staleness_sweep(std::shared_ptr<const World> world, const DemandModel& model,
                                      const PolicyBundle& bundle, const std::vector<int>& ks,
                                      const std::vector<uint64_t>& seeds, int threads = 0);

/// Port rows averaged over episodes.
std::vector<PortRow> regional_statistics(const std::vector<EpisodeReport>& reports);

void write_summary_csv(std::ostream& out, const std::vector<RunSummary>& rows);
void write_episode_csv(std::ostream& out, const std::vector<EpisodeReport>& reports);
std::vector<EpisodeReport> read_episode_csv(std::istream& in);
void write_regional_csv(std::ostream& out, const std::string& policy,
                        const std::vector<PortRow>& rows, bool header = true);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace ecr
