#include "clawtrace/card_yaml.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace clawtrace {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// emit

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\x%02x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
  return out;
}

}  // namespace

std::string emit_yaml(const TraceCard& card) {
  std::ostringstream os;
  os << "session_id: " << quote(card.session_id) << "\n";
  os << "model: " << quote(card.model) << "\n";
  if (card.has_costs)
    os << "total_cost_usd: " << card.total_cost_usd.to_string() << "\n";
  os << "total_tokens:\n";
  os << "  input: " << card.total_tokens.input << "\n";
  os << "  output: " << card.total_tokens.output << "\n";
  os << "  cacheRead: " << card.total_tokens.cache_read << "\n";
  os << "  cacheWrite: " << card.total_tokens.cache_write << "\n";
  os << "outcome: " << quote(card.outcome) << "\n";

  if (card.top_cost_spans.empty()) {
    os << "top_cost_spans: []\n";
  } else {
    os << "top_cost_spans:\n";
    for (const auto& span : card.top_cost_spans) {
      os << "  - ";
      bool first = true;
      auto field = [&](const std::string& rendered) {
        if (!first) os << "    ";
        os << rendered << "\n";
        first = false;
      };
      if (!span.span_id.empty()) field("span_id: " + quote(span.span_id));
      field(std::string("kind: ") + to_string(span.kind));
      if (span.role_hint)
        field(std::string("role_hint: ") + to_string(*span.role_hint));
      if (card.has_costs) field("cost_usd: " + span.cost_usd.to_string());
      field("tokens: {in: " + std::to_string(span.tokens_in) +
            ", out: " + std::to_string(span.tokens_out) + "}");
      if (!span.args_sample.empty())
        field("args_sample: " + quote(span.args_sample));
    }
  }

  if (card.redundant_tool_calls.empty()) {
    os << "redundant_tool_calls: []\n";
  } else {
    os << "redundant_tool_calls:\n";
    for (const auto& c : card.redundant_tool_calls) {
      os << "  - cluster: [";
      for (size_t i = 0; i < c.cluster.size(); ++i) {
        if (i) os << ", ";
        os << quote(c.cluster[i]);
      }
      os << "]\n";
      os << "    tool: " << quote(c.tool) << "\n";
      os << "    similarity: " << format_double(c.similarity) << "\n";
    }
  }

  if (card.sub_agents.empty()) {
    os << "sub_agents: []\n";
  } else {
    os << "sub_agents:\n";
    for (const auto& s : card.sub_agents) {
      os << "  - child_session_key: " << quote(s.child_session_key) << "\n";
      os << "    total_cost_usd: " << s.total_cost_usd.to_string() << "\n";
      os << "    output_used_in_final: " << format_double(s.output_used_in_final)
         << "\n";
    }
  }

  if (card.failed_or_repaired.empty()) {
    os << "failed_or_repaired: []\n";
  } else {
    os << "failed_or_repaired:\n";
    for (const auto& f : card.failed_or_repaired) {
      os << "  - span_id: " << quote(f.span_id) << "\n";
      os << "    tool: " << quote(f.tool) << "\n";
      os << "    error_excerpt: " << quote(f.error_excerpt) << "\n";
      os << "    repaired: " << (f.repaired ? "true" : "false") << "\n";
      if (!f.repaired_by.empty())
        os << "    repaired_by: " << quote(f.repaired_by) << "\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// parse: a block-YAML subset sufficient for cards, including packed
// "k1: v1  k2: v2" lines, flow maps and flow sequences.

namespace {

struct Node {
  enum class Type { scalar, seq, map };
  Type type = Type::scalar;
  std::string scalar;
  bool quoted = false;
  std::vector<Node> seq;
  std::vector<std::pair<std::string, Node>> map;
  int line = 0;
  int col = 0;

  const Node* get(const std::string& key) const {
    for (const auto& [k, v] : map)
      if (k == key) return &v;
    return nullptr;
  }
};

struct Line {
  int number = 0;
  int indent = 0;
  std::string content;  // without indent
};

bool is_key_start(const std::string& s, size_t pos) {
  if (pos >= s.size()) return false;
  char c = s[pos];
  if (!std::isalpha(static_cast<unsigned char>(c)) && c != '_') return false;
  while (pos < s.size() &&
         (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
    ++pos;
  return pos < s.size() && s[pos] == ':' &&
         (pos + 1 == s.size() || s[pos + 1] == ' ');
}

class Parser {
 public:
  explicit Parser(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
      ++number;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      size_t indent = raw.find_first_not_of(' ');
      if (indent == std::string::npos) continue;  // blank
      if (raw[indent] == '#') continue;
      lines_.push_back({number, static_cast<int>(indent), raw.substr(indent)});
    }
  }

  Node parse() {
    if (lines_.empty()) throw YamlError("empty document", 1, 1);
    Node root = parse_block(lines_[0].indent);
    if (cursor_ != lines_.size())
      throw YamlError("unexpected content", lines_[cursor_].number, 1);
    return root;
  }

 private:
  Node parse_block(int indent) {
    const Line& first = lines_[cursor_];
    if (first.content[0] == '-' &&
        (first.content.size() == 1 || first.content[1] == ' '))
      return parse_seq(indent);
    return parse_map(indent);
  }

  Node parse_map(int indent) {
    Node node;
    node.type = Node::Type::map;
    node.line = lines_[cursor_].number;
    node.col = indent + 1;
    while (cursor_ < lines_.size() && lines_[cursor_].indent == indent &&
           !(lines_[cursor_].content[0] == '-' &&
             (lines_[cursor_].content.size() == 1 ||
              lines_[cursor_].content[1] == ' '))) {
      const Line line = lines_[cursor_++];
      parse_pairs_into(node, line, 0, indent);
    }
    if (node.map.empty())
      throw YamlError("expected mapping", lines_[cursor_ < lines_.size()
                                                      ? cursor_
                                                      : lines_.size() - 1]
                          .number,
                      indent + 1);
    return node;
  }

  Node parse_seq(int indent) {
    Node node;
    node.type = Node::Type::seq;
    node.line = lines_[cursor_].number;
    node.col = indent + 1;
    while (cursor_ < lines_.size() && lines_[cursor_].indent == indent &&
           lines_[cursor_].content[0] == '-' &&
           (lines_[cursor_].content.size() == 1 ||
            lines_[cursor_].content[1] == ' ')) {
      const Line line = lines_[cursor_++];
      size_t pos = 1;
      while (pos < line.content.size() && line.content[pos] == ' ') ++pos;
      int item_indent = indent + 2;
      Node item;
      if (pos >= line.content.size()) {
        // Bare dash: item body on following deeper lines.
        if (cursor_ < lines_.size() && lines_[cursor_].indent > indent)
          item = parse_block(lines_[cursor_].indent);
        else
          throw YamlError("empty sequence item", line.number, 1);
      } else if (is_key_start(line.content, pos)) {
        item.type = Node::Type::map;
        item.line = line.number;
        item.col = static_cast<int>(pos) + line.indent + 1;
        parse_pairs_into(item, line, pos, indent);
        while (cursor_ < lines_.size() &&
               lines_[cursor_].indent == item_indent &&
               !(lines_[cursor_].content[0] == '-' &&
                 (lines_[cursor_].content.size() == 1 ||
                  lines_[cursor_].content[1] == ' '))) {
          const Line cont = lines_[cursor_++];
          parse_pairs_into(item, cont, 0, item_indent);
        }
      } else {
        item = parse_inline_value(line, pos, indent);
      }
      node.seq.push_back(std::move(item));
    }
    return node;
  }

  // Parses one or more "key: value" pairs from a line, the packed form
  // included, appending them to the map node.
  void parse_pairs_into(Node& node, const Line& line, size_t pos,
                        int block_indent) {
    const std::string& s = line.content;
    while (pos < s.size()) {
      while (pos < s.size() && s[pos] == ' ') ++pos;
      if (pos >= s.size()) break;
      if (!is_key_start(s, pos))
        throw YamlError("expected key", line.number,
                        static_cast<int>(pos) + line.indent + 1);
      size_t key_start = pos;
      while (pos < s.size() && s[pos] != ':') ++pos;
      std::string key = s.substr(key_start, pos - key_start);
      ++pos;  // ':'
      while (pos < s.size() && s[pos] == ' ') ++pos;
      if (pos >= s.size()) {
        // Nested block value on deeper lines, or an empty scalar.
        Node value;
        if (cursor_ < lines_.size() && lines_[cursor_].indent > block_indent) {
          value = parse_block(lines_[cursor_].indent);
        } else {
          value.type = Node::Type::scalar;
          value.line = line.number;
          value.col = static_cast<int>(pos) + line.indent + 1;
        }
        node.map.emplace_back(std::move(key), std::move(value));
        return;
      }
      Node value = parse_inline_value(line, pos, block_indent);
      pos = inline_end_;
      node.map.emplace_back(std::move(key), std::move(value));
    }
  }

  Node parse_inline_value(const Line& line, size_t pos, int /*block_indent*/) {
    const std::string& s = line.content;
    Node value;
    value.line = line.number;
    value.col = static_cast<int>(pos) + line.indent + 1;
    if (s[pos] == '"') {
      value.type = Node::Type::scalar;
      value.quoted = true;
      value.scalar = parse_quoted(line, pos);
      inline_end_ = quoted_end_;
    } else if (s[pos] == '[') {
      value.type = Node::Type::seq;
      ++pos;
      while (true) {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == ',')) ++pos;
        if (pos >= s.size())
          throw YamlError("unterminated flow sequence", line.number,
                          value.col);
        if (s[pos] == ']') {
          ++pos;
          break;
        }
        Node elem;
        elem.type = Node::Type::scalar;
        elem.line = line.number;
        elem.col = static_cast<int>(pos) + line.indent + 1;
        if (s[pos] == '"') {
          elem.quoted = true;
          elem.scalar = parse_quoted(line, pos);
          pos = quoted_end_;
        } else {
          size_t end = s.find_first_of(",]", pos);
          if (end == std::string::npos)
            throw YamlError("unterminated flow sequence", line.number,
                            value.col);
          elem.scalar = trim(s.substr(pos, end - pos));
          pos = end;
        }
        value.seq.push_back(std::move(elem));
      }
      inline_end_ = pos;
    } else if (s[pos] == '{') {
      value.type = Node::Type::map;
      ++pos;
      while (true) {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == ',')) ++pos;
        if (pos >= s.size())
          throw YamlError("unterminated flow map", line.number, value.col);
        if (s[pos] == '}') {
          ++pos;
          break;
        }
        size_t colon = s.find(':', pos);
        if (colon == std::string::npos)
          throw YamlError("missing ':' in flow map", line.number,
                          static_cast<int>(pos) + line.indent + 1);
        std::string key = trim(s.substr(pos, colon - pos));
        pos = colon + 1;
        while (pos < s.size() && s[pos] == ' ') ++pos;
        Node elem;
        elem.type = Node::Type::scalar;
        elem.line = line.number;
        elem.col = static_cast<int>(pos) + line.indent + 1;
        if (pos < s.size() && s[pos] == '"') {
          elem.quoted = true;
          elem.scalar = parse_quoted(line, pos);
          pos = quoted_end_;
        } else {
          size_t end = s.find_first_of(",}", pos);
          if (end == std::string::npos)
            throw YamlError("unterminated flow map", line.number, value.col);
          elem.scalar = trim(s.substr(pos, end - pos));
          pos = end;
        }
        value.map.emplace_back(std::move(key), std::move(elem));
      }
      inline_end_ = pos;
    } else {
      // Plain scalar: runs to end of line or to a packed "  key:" boundary.
      value.type = Node::Type::scalar;
      size_t end = s.size();
      for (size_t i = pos; i + 2 < s.size(); ++i) {
        if (s[i] == ' ' && s[i + 1] == ' ') {
          size_t k = i + 2;
          while (k < s.size() && s[k] == ' ') ++k;
          if (is_key_start(s, k)) {
            end = i;
            break;
          }
        }
      }
      value.scalar = trim(s.substr(pos, end - pos));
      inline_end_ = end;
    }
    return value;
  }

  std::string parse_quoted(const Line& line, size_t pos) {
    const std::string& s = line.content;
    std::string out;
    ++pos;  // opening quote
    while (pos < s.size() && s[pos] != '"') {
      if (s[pos] == '\\' && pos + 1 < s.size()) {
        char c = s[pos + 1];
        switch (c) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'x': {
            auto hex = [](char h) -> int {
              if (h >= '0' && h <= '9') return h - '0';
              if (h >= 'a' && h <= 'f') return h - 'a' + 10;
              if (h >= 'A' && h <= 'F') return h - 'A' + 10;
              return -1;
            };
            if (pos + 3 < s.size() && hex(s[pos + 2]) >= 0 &&
                hex(s[pos + 3]) >= 0) {
              out += static_cast<char>(hex(s[pos + 2]) * 16 + hex(s[pos + 3]));
              pos += 2;
            }
            break;
          }
          default: out += c;
        }
        pos += 2;
      } else {
        out += s[pos++];
      }
    }
    if (pos >= s.size())
      throw YamlError("unterminated string", line.number,
                      static_cast<int>(pos) + line.indent + 1);
    quoted_end_ = pos + 1;
    return out;
  }

  static std::string trim(std::string s) {
    size_t b = s.find_first_not_of(' ');
    size_t e = s.find_last_not_of(' ');
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
  }

  std::vector<Line> lines_;
  size_t cursor_ = 0;
  size_t inline_end_ = 0;
  size_t quoted_end_ = 0;
};

[[noreturn]] void fail(const Node& node, const std::string& msg) {
  throw YamlError(msg, node.line, node.col);
}

std::string expect_string(const Node& node, const char* what) {
  if (node.type != Node::Type::scalar) fail(node, std::string(what) +
                                                      " must be a string");
  return node.scalar;
}

int64_t expect_int(const Node& node, const char* what) {
  if (node.type != Node::Type::scalar)
    fail(node, std::string(what) + " must be an integer");
  int64_t value = 0;
  auto res = std::from_chars(node.scalar.data(),
                             node.scalar.data() + node.scalar.size(), value);
  if (res.ec != std::errc() || res.ptr != node.scalar.data() + node.scalar.size())
    fail(node, std::string(what) + " must be an integer");
  return value;
}

double expect_double(const Node& node, const char* what) {
  if (node.type != Node::Type::scalar)
    fail(node, std::string(what) + " must be a number");
  char* end = nullptr;
  double value = std::strtod(node.scalar.c_str(), &end);
  if (end != node.scalar.c_str() + node.scalar.size())
    fail(node, std::string(what) + " must be a number");
  return value;
}

Money expect_money(const Node& node, const char* what) {
  if (node.type != Node::Type::scalar)
    fail(node, std::string(what) + " must be a decimal");
  try {
    return Money::parse(node.scalar);
  } catch (const std::exception& e) {
    fail(node, std::string(what) + ": " + e.what());
  }
}

}  // namespace

TraceCard parse_yaml(const std::string& text) {
  Parser parser(text);
  Node root = parser.parse();
  if (root.type != Node::Type::map)
    throw YamlError("card must be a mapping", root.line, root.col);

  TraceCard card;
  const Node* n = root.get("session_id");
  if (!n) throw YamlError("missing session_id", root.line, root.col);
  card.session_id = expect_string(*n, "session_id");
  n = root.get("model");
  if (!n) throw YamlError("missing model", root.line, root.col);
  card.model = expect_string(*n, "model");

  if (const Node* cost = root.get("total_cost_usd")) {
    card.total_cost_usd = expect_money(*cost, "total_cost_usd");
    card.has_costs = true;
  } else {
    card.has_costs = false;
  }

  if (const Node* tokens = root.get("total_tokens")) {
    if (tokens->type != Node::Type::map)
      fail(*tokens, "total_tokens must be a mapping");
    if (const Node* v = tokens->get("input"))
      card.total_tokens.input = expect_int(*v, "input");
    if (const Node* v = tokens->get("output"))
      card.total_tokens.output = expect_int(*v, "output");
    if (const Node* v = tokens->get("cacheRead"))
      card.total_tokens.cache_read = expect_int(*v, "cacheRead");
    if (const Node* v = tokens->get("cacheWrite"))
      card.total_tokens.cache_write = expect_int(*v, "cacheWrite");
  }

  if (const Node* v = root.get("outcome"))
    card.outcome = expect_string(*v, "outcome");

  if (const Node* spans = root.get("top_cost_spans")) {
    if (spans->type != Node::Type::seq)
      fail(*spans, "top_cost_spans must be a sequence");
    for (const Node& item : spans->seq) {
      if (item.type != Node::Type::map)
        fail(item, "top_cost_spans entry must be a mapping");
      CostSpanSummary span;
      if (const Node* v = item.get("span_id"))
        span.span_id = expect_string(*v, "span_id");
      const Node* kind = item.get("kind");
      if (!kind) fail(item, "span entry missing kind");
      std::string kind_name = expect_string(*kind, "kind");
      if (kind_name == "llm")
        span.kind = SpanKind::llm;
      else if (kind_name == "tool")
        span.kind = SpanKind::tool;
      else
        fail(*kind, "kind must be llm or tool");
      if (const Node* v = item.get("role_hint")) {
        auto hint = role_hint_from_string(expect_string(*v, "role_hint"));
        if (!hint) fail(*v, "unknown role_hint");
        span.role_hint = hint;
      }
      if (const Node* v = item.get("cost_usd"))
        span.cost_usd = expect_money(*v, "cost_usd");
      if (const Node* v = item.get("tokens")) {
        if (v->type != Node::Type::map) fail(*v, "tokens must be a mapping");
        if (const Node* t = v->get("in")) span.tokens_in = expect_int(*t, "in");
        if (const Node* t = v->get("out"))
          span.tokens_out = expect_int(*t, "out");
      }
      if (const Node* v = item.get("args_sample"))
        span.args_sample = expect_string(*v, "args_sample");
      card.top_cost_spans.push_back(std::move(span));
    }
  }

  if (const Node* clusters = root.get("redundant_tool_calls")) {
    if (clusters->type != Node::Type::seq)
      fail(*clusters, "redundant_tool_calls must be a sequence");
    for (const Node& item : clusters->seq) {
      if (item.type != Node::Type::map)
        fail(item, "cluster entry must be a mapping");
      RedundantCluster cluster;
      const Node* members = item.get("cluster");
      if (!members || members->type != Node::Type::seq)
        fail(item, "cluster entry missing member list");
      for (const Node& m : members->seq)
        cluster.cluster.push_back(expect_string(m, "cluster member"));
      const Node* tool = item.get("tool");
      if (!tool) fail(item, "cluster entry missing tool");
      cluster.tool = expect_string(*tool, "tool");
      if (const Node* v = item.get("similarity"))
        cluster.similarity = expect_double(*v, "similarity");
      card.redundant_tool_calls.push_back(std::move(cluster));
    }
  }

  if (const Node* subs = root.get("sub_agents")) {
    if (subs->type != Node::Type::seq)
      fail(*subs, "sub_agents must be a sequence");
    for (const Node& item : subs->seq) {
      if (item.type != Node::Type::map)
        fail(item, "sub_agents entry must be a mapping");
      SubAgentSummary sub;
      const Node* key = item.get("child_session_key");
      if (!key) fail(item, "sub_agents entry missing child_session_key");
      sub.child_session_key = expect_string(*key, "child_session_key");
      if (const Node* v = item.get("total_cost_usd"))
        sub.total_cost_usd = expect_money(*v, "total_cost_usd");
      if (const Node* v = item.get("output_used_in_final"))
        sub.output_used_in_final = expect_double(*v, "output_used_in_final");
      card.sub_agents.push_back(std::move(sub));
    }
  }

  if (const Node* failed = root.get("failed_or_repaired")) {
    if (failed->type != Node::Type::seq)
      fail(*failed, "failed_or_repaired must be a sequence");
    for (const Node& item : failed->seq) {
      if (item.type != Node::Type::map)
        fail(item, "failed_or_repaired entry must be a mapping");
      FailedStep step;
      if (const Node* v = item.get("span_id"))
        step.span_id = expect_string(*v, "span_id");
      if (const Node* v = item.get("tool"))
        step.tool = expect_string(*v, "tool");
      if (const Node* v = item.get("error_excerpt"))
        step.error_excerpt = expect_string(*v, "error_excerpt");
      if (const Node* v = item.get("repaired")) {
        std::string b = expect_string(*v, "repaired");
        if (b != "true" && b != "false") fail(*v, "repaired must be a boolean");
        step.repaired = b == "true";
      }
      if (const Node* v = item.get("repaired_by"))
        step.repaired_by = expect_string(*v, "repaired_by");
      card.failed_or_repaired.push_back(std::move(step));
    }
  }

  return card;
}

}  // namespace clawtrace
