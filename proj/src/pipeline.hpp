#pragma once

#include <iosfwd>

#include "run_config.hpp"

namespace tg {

// Pipeline stages behind the CLI subcommands. Each stage reads its inputs
// from the configured paths, refuses artifacts whose header dims disagree
// with the config, writes its artifacts deterministically (re-runs are
// byte-identical), and logs line-oriented progress to `log`.

void run_gen_synthetic(const RunConfig &config, std::ostream &log);
void run_train_sae(const RunConfig &config, std::ostream &log);
void run_cluster(const RunConfig &config, std::ostream &log);
void run_build_graph(const RunConfig &config, std::ostream &log);
void run_score(const RunConfig &config, std::ostream &log);
void run_metrics(const RunConfig &config, std::ostream &log);
void run_sweep(const RunConfig &config, std::ostream &log);
void run_export_graph(const RunConfig &config, std::ostream &log);

} // namespace tg
