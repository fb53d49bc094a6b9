#pragma once

#include <string>
#include <vector>

#include "veds/solver.hpp"

namespace veds {

struct SuiteResult {
  std::string name;
  bool passed = false;
  double margin = 0.0;  // suite-specific worst-case slack (sign: >= 0  is good)
  std::string detail;
  double seconds = 0.0;
};

// Oracle suites. Each is deterministic (internally seeded) and self-contained.
SuiteResult suite_prop1_closed_form(int instances = 1000);
SuiteResult suite_prop2_prefix(int slots = 200);
SuiteResult suite_p4_kkt_grid(int instances = 200);
SuiteResult suite_theorem2_tiny(int instances = 20);
SuiteResult suite_lemma1_mc(int seeds = 200);
SuiteResult suite_theorem1_mc(int seeds = 20, int rounds = 50);
SuiteResult suite_sigmoid_identities();
SuiteResult suite_channel_statistics(int samples = 100000);
SuiteResult suite_mobility_statistics(int crossings = 100000);

/// fast: closed-form/prefix/P4/tiny-bound/sigmoid suites.
/// full: adds the 1e5-sample channel and mobility statistics and the
/// Lemma 1 / Theorem 1 Monte-Carlo suites.
std::vector<SuiteResult> run_verification(bool full);

/// Builds one frozen tiny bound-verification instance (T=6, |S|=2, |U|=2,
/// two power levels); shared by the suite and the unit tests.
struct TinyBundle {
  std::vector<ChannelSnapshot> snapshots;
  std::vector<int> sovs, opvs;
  RoundContext ctx;
  TinyInstance offline;
};
TinyBundle make_tiny_bundle(Rng& rng);

}  // namespace veds
