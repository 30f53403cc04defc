#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "clawtrace/event.hpp"

namespace clawtrace {

// Deterministic generator: mt19937_64 is bit-specified by the standard and
// bounds are applied by modulo, so corpora are reproducible everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  uint64_t next(uint64_t bound) { return bound ? engine_() % bound : 0; }
  int64_t range(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(next(static_cast<uint64_t>(hi - lo + 1)));
  }

 private:
  std::mt19937_64 engine_;
};

struct SessionSpec {
  std::string key;
  std::string model = "openai-codex/gpt-5.4";
  int turns = 3;
  int tools_per_turn = 1;
  bool plant_redundant_pair = false;  // same-tool pair at similarity 0.94
  bool plant_near_miss = false;       // same-tool pair at similarity 0.78
  bool plant_failure = false;         // error result followed by an ok retry
  bool spawn_subagent = false;
  std::string child_key;
  std::string outcome;  // stamped on session_end when non-empty
};

// Well-nested event stream for one session; span ids are left to ordinal
// synthesis at tree-build time.
std::vector<TraceEvent> synth_session(const SessionSpec& spec, Rng& rng);

// Reference tool-argument strings with pinned edit distances to the base:
// close is 3 edits over 50 chars (similarity 0.94), near is 11 (0.78).
std::string synth_args_base();
std::string synth_args_close();
std::string synth_args_near();

// 10 sessions: five with a planted redundant cluster, five clean, one of
// the clean ones carrying the 0.78 near-miss pair.
std::vector<std::vector<TraceEvent>> synth_redundancy_corpus(uint64_t seed);

// Randomized small sessions for determinism checks.
std::vector<std::vector<TraceEvent>> synth_random_sessions(uint64_t seed,
                                                           int count);

// Exactly 200 spans (40 turns x (1 llm + 4 tools)).
std::vector<TraceEvent> synth_big_session(uint64_t seed);

// 50 sessions x 200 events = 10,000 events.
std::vector<std::vector<TraceEvent>> synth_robustness_corpus(uint64_t seed);

struct SynthCorpus {
  std::vector<std::vector<TraceEvent>> sessions;
  std::string outcomes_csv;  // task_id,condition,quality,cost_usd
};

// End-to-end corpus: successes with planted waste, partials, failures, and
// fabricated outcome rows for every ablation condition.
SynthCorpus synth_smoke_corpus(uint64_t seed);

}  // namespace clawtrace
