#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "clawtrace/event.hpp"
#include "clawtrace/money.hpp"
#include "clawtrace/span_tree.hpp"

namespace clawtrace {

// Four USD-per-million-token rates for one model.
struct ModelRates {
  Money input;
  Money output;
  Money cache_read;
  Money cache_write;
};

// Lookup of an unknown model is an explicit error, never a silent zero.
class PricingTable {
 public:
  void set(const std::string& model, ModelRates rates);
  const ModelRates& lookup(const std::string& model) const;  // UnknownModelError
  bool has(const std::string& model) const;

  // {"schema_version":"1","models":{id:{input,output,cacheRead,cacheWrite}}}
  // with rates as decimal strings per million tokens.
  static PricingTable load(const std::filesystem::path& path);
  static PricingTable from_json(const std::string& text);

 private:
  std::map<std::string, ModelRates> entries_;
};

// Ships the openai-codex/gpt-5.4 row: $2.00 / $8.00 / $0.50 / $2.00 per M.
PricingTable default_pricing();

struct CostBreakdown {
  Money input_usd;
  Money output_usd;
  Money cache_read_usd;
  Money cache_write_usd;
  Money total_usd;
  bool operator==(const CostBreakdown&) const = default;
};

// cost = r_in*t_in + r_out*t_out + r_cacheRead*t_cacheRead + r_cacheWrite*t_cacheWrite
// with every component exact (rate/1e6 USD per token, integer picodollars).
CostBreakdown span_cost(const TokenUsage& tokens, const ModelRates& rates);

// Deliberately naive comparator: cacheRead tokens priced at the fresh input
// rate. Quantifies how much a cache-unaware reading overstates spend.
Money naive_cost(const TokenUsage& tokens, const ModelRates& rates);

struct SessionCost {
  std::map<std::string, CostBreakdown> per_span;  // llm spans by span_id
  Money total;
  TokenUsage total_tokens;
};

// Sums every llm span exactly once. Sub-agent sessions are not folded in;
// their costs are reported per child by the card compiler.
SessionCost session_cost(const SessionTree& tree, const PricingTable& pricing);

}  // namespace clawtrace
