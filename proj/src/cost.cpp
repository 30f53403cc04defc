#include "clawtrace/cost.hpp"

#include <fstream>
#include <sstream>

#include "clawtrace/errors.hpp"

namespace clawtrace {

void PricingTable::set(const std::string& model, ModelRates rates) {
  entries_[model] = rates;
}

const ModelRates& PricingTable::lookup(const std::string& model) const {
  auto it = entries_.find(model);
  if (it == entries_.end()) throw UnknownModelError(model);
  return it->second;
}

bool PricingTable::has(const std::string& model) const {
  return entries_.count(model) > 0;
}

PricingTable PricingTable::from_json(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw ConfigError("pricing table is not a JSON object");
  if (!doc.contains("models") || !doc["models"].is_object())
    throw ConfigError("pricing table missing models object");
  PricingTable table;
  for (const auto& [model, entry] : doc["models"].items()) {
    auto rate = [&](const char* key) {
      if (!entry.contains(key))
        throw ConfigError("pricing for " + model + " missing rate: " + key);
      const auto& v = entry[key];
      if (v.is_string()) return Money::parse(v.get<std::string>());
      if (v.is_number()) {
        std::ostringstream os;
        os << v;
        return Money::parse(os.str());
      }
      throw ConfigError("pricing rate must be a decimal string: " + model);
    };
    ModelRates rates{rate("input"), rate("output"), rate("cacheRead"),
                     rate("cacheWrite")};
    if (rates.input < Money{} || rates.output < Money{} ||
        rates.cache_read < Money{} || rates.cache_write < Money{})
      throw ConfigError("negative pricing rate for " + model);
    table.set(model, rates);
  }
  return table;
}

PricingTable PricingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read pricing table: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

PricingTable default_pricing() {
  PricingTable table;
  table.set("openai-codex/gpt-5.4",
            ModelRates{Money::parse("2.00"), Money::parse("8.00"),
                       Money::parse("0.50"), Money::parse("2.00")});
  return table;
}

CostBreakdown span_cost(const TokenUsage& tokens, const ModelRates& rates) {
  CostBreakdown c;
  c.input_usd =
      token_cost(rates.input.pico_per_token_from_per_million(), tokens.input);
  c.output_usd =
      token_cost(rates.output.pico_per_token_from_per_million(), tokens.output);
  c.cache_read_usd = token_cost(
      rates.cache_read.pico_per_token_from_per_million(), tokens.cache_read);
  c.cache_write_usd = token_cost(
      rates.cache_write.pico_per_token_from_per_million(), tokens.cache_write);
  c.total_usd =
      c.input_usd + c.output_usd + c.cache_read_usd + c.cache_write_usd;
  return c;
}

Money naive_cost(const TokenUsage& tokens, const ModelRates& rates) {
  TokenUsage as_fresh = tokens;
  as_fresh.input += tokens.cache_read;
  as_fresh.cache_read = 0;
  return span_cost(as_fresh, rates).total_usd;
}

SessionCost session_cost(const SessionTree& tree, const PricingTable& pricing) {
  const ModelRates& rates = pricing.lookup(tree.model);
  SessionCost result;
  tree.for_each_span([&](const Span& s) {
    if (s.kind != SpanKind::llm) return;
    CostBreakdown c = span_cost(s.tokens, rates);
    result.total += c.total_usd;
    result.total_tokens += s.tokens;
    result.per_span.emplace(s.span_id, std::move(c));
  });
  return result;
}

}  // namespace clawtrace
