#include "flock/scenario.hpp"

#include "flock/csv.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

namespace flock {

ScenarioError::ScenarioError(const std::string& origin, std::size_t line, const std::string& what)
    : std::runtime_error(origin + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

struct Value {
  enum class Kind { number, boolean, string, array };
  Kind kind{Kind::number};
  double num{0.0};
  bool flag{false};
  std::string str;
  std::vector<Value> items;
  std::size_t line{0};
};

struct Entry {
  Value value;
  bool used{false};
};

struct Table {
  std::map<std::string, Entry> entries;
  std::size_t line{0};
};

struct Document {
  std::map<std::string, Table> tables;
  std::map<std::string, std::vector<Table>> arrays;
};

bool is_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
}

class Parser {
public:
  Parser(std::string_view text, const std::string& origin) : text_(text), origin_(origin) {}

  Document parse() {
    Document doc;
    Table* current = nullptr;
    while (true) {
      skip_inline();
      if (eof()) {
        break;
      }
      const char c = peek();
      if (c == '\n' || c == '\r') {
        advance();
        continue;
      }
      if (c == '#') {
        skip_comment();
        continue;
      }
      if (c == '[') {
        advance();
        const bool array = !eof() && peek() == '[';
        if (array) {
          advance();
        }
        skip_inline();
        const std::string name = key();
        skip_inline();
        expect(']');
        if (array) {
          expect(']');
          auto& list = doc.arrays[name];
          list.emplace_back();
          current = &list.back();
        } else {
          if (doc.tables.count(name) != 0) {
            fail("duplicate section [" + name + "]");
          }
          current = &doc.tables[name];
        }
        current->line = line_;
        end_of_line();
        continue;
      }
      const std::size_t key_line = line_;
      const std::string k = key();
      if (current == nullptr) {
        fail("key '" + k + "' outside of any section");
      }
      skip_inline();
      expect('=');
      skip_inline();
      Value v = value();
      if (current->entries.count(k) != 0) {
        line_ = key_line;
        fail("duplicate key '" + k + "'");
      }
      current->entries.emplace(k, Entry{std::move(v), false});
      end_of_line();
    }
    return doc;
  }

private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ScenarioError(origin_, line_, what); }

  void expect(char c) {
    if (eof() || peek() != c) {
      fail(std::string("expected '") + c + "'");
    }
    advance();
  }

  void skip_inline() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) {
      advance();
    }
  }

  void skip_comment() {
    while (!eof() && peek() != '\n') {
      advance();
    }
  }

  void skip_any() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_inline();
    if (!eof() && peek() == '#') {
      skip_comment();
    }
    if (!eof() && peek() == '\r') {
      advance();
    }
    if (!eof() && peek() != '\n') {
      fail("unexpected trailing characters");
    }
  }

  std::string key() {
    const std::size_t start = pos_;
    while (!eof() && is_key_char(peek())) {
      advance();
    }
    if (pos_ == start) {
      fail("expected a key");
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  Value value() {
    if (eof()) {
      fail("expected a value");
    }
    Value v;
    v.line = line_;
    const char c = peek();
    if (c == '"') {
      advance();
      v.kind = Value::Kind::string;
      while (true) {
        if (eof() || peek() == '\n') {
          fail("unterminated string");
        }
        char ch = peek();
        advance();
        if (ch == '"') {
          break;
        }
        if (ch == '\\') {
          if (eof()) {
            fail("unterminated string");
          }
          ch = peek();
          advance();
          if (ch != '"' && ch != '\\') {
            fail("unsupported escape sequence");
          }
        }
        v.str.push_back(ch);
      }
      return v;
    }
    if (c == '[') {
      advance();
      v.kind = Value::Kind::array;
      while (true) {
        skip_any();
        if (eof()) {
          fail("unterminated array");
        }
        if (peek() == ']') {
          advance();
          break;
        }
        v.items.push_back(value());
        skip_any();
        if (eof()) {
          fail("unterminated array");
        }
        if (peek() == ',') {
          advance();
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
      return v;
    }
    const std::size_t start = pos_;
    while (!eof()) {
      const char ch = peek();
      if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == ',' || ch == ']' || ch == '#') {
        break;
      }
      advance();
    }
    std::string_view tok = text_.substr(start, pos_ - start);
    if (tok == "true" || tok == "false") {
      v.kind = Value::Kind::boolean;
      v.flag = tok == "true";
      return v;
    }
    try {
      v.num = parse_double(tok);
    } catch (const std::invalid_argument&) {
      fail("invalid value '" + std::string(tok) + "'");
    }
    return v;
  }

  std::string_view text_;
  const std::string& origin_;
  std::size_t pos_{0};
  std::size_t line_{1};
};

class Section {
public:
  Section(Table* table, std::string name, const std::string& origin)
      : table_(table), name_(std::move(name)), origin_(origin) {}

  bool present() const { return table_ != nullptr; }

  [[noreturn]] void fail(std::size_t line, const std::string& what) const {
    throw ScenarioError(origin_, line, "[" + name_ + "] " + what);
  }

  const Value* find(const std::string& key) {
    if (table_ == nullptr) {
      return nullptr;
    }
    auto it = table_->entries.find(key);
    if (it == table_->entries.end()) {
      return nullptr;
    }
    it->second.used = true;
    return &it->second.value;
  }

  const Value& require(const std::string& key) {
    const Value* v = find(key);
    if (v == nullptr) {
      fail(table_ ? table_->line : 0, "missing key '" + key + "'");
    }
    return *v;
  }

  double to_number(const Value& v, const std::string& key) const {
    if (v.kind != Value::Kind::number) {
      fail(v.line, "'" + key + "' must be a number");
    }
    return v.num;
  }

  Vec2 to_vec2(const Value& v, const std::string& key) const {
    if (v.kind != Value::Kind::array || v.items.size() != 2) {
      fail(v.line, "'" + key + "' must be an array of two numbers");
    }
    return {to_number(v.items[0], key), to_number(v.items[1], key)};
  }

  void number(const std::string& key, double& out) {
    if (const Value* v = find(key)) {
      out = to_number(*v, key);
    }
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const Value* v = find(key);
    if (v == nullptr) {
      return fallback;
    }
    if (v->kind != Value::Kind::string) {
      fail(v->line, "'" + key + "' must be a string");
    }
    return v->str;
  }

  void finish() const {
    if (table_ == nullptr) {
      return;
    }
    for (const auto& [k, e] : table_->entries) {
      if (!e.used) {
        fail(e.value.line, "unknown key '" + k + "'");
      }
    }
  }

private:
  Table* table_;
  std::string name_;
  const std::string& origin_;
};

Section section(Document& doc, const std::string& name, const std::string& origin) {
  auto it = doc.tables.find(name);
  return {it == doc.tables.end() ? nullptr : &it->second, name, origin};
}

std::size_t to_index(const Section& s, const Value& v, const std::string& key) {
  const double x = s.to_number(v, key);
  if (!(x >= 0.0) || x != std::floor(x) || x > 1e9) {
    s.fail(v.line, "'" + key + "' entries must be non-negative integers");
  }
  return static_cast<std::size_t>(x);
}

std::string format_vec2(const Vec2& v) { return "[" + format_double(v.x()) + ", " + format_double(v.y()) + "]"; }

}  // namespace

FlockingLaw parse_controller(std::string_view name) {
  if (name == "unconstrained") {
    return FlockingLaw::unconstrained;
  }
  if (name == "constrained") {
    return FlockingLaw::constrained;
  }
  throw std::invalid_argument("unknown controller '" + std::string(name) + "'");
}

std::string_view controller_name(FlockingLaw law) {
  return law == FlockingLaw::constrained ? "constrained" : "unconstrained";
}

ScenarioConfig parse_scenario(std::string_view text, const std::string& origin) {
  Document doc = Parser(text, origin).parse();
  ScenarioConfig cfg;

  for (const auto& [name, table] : doc.tables) {
    if (name != "field" && name != "gains" && name != "safety" && name != "sim") {
      throw ScenarioError(origin, table.line, "unknown section [" + name + "]");
    }
  }
  for (const auto& [name, list] : doc.arrays) {
    if (name != "obstacles" && name != "agents") {
      throw ScenarioError(origin, list.front().line, "unknown section [[" + name + "]]");
    }
  }

  {
    Section s = section(doc, "field", origin);
    Mat2 h = Mat2::Identity();
    Vec2 center = Vec2::Zero();
    std::size_t line = 0;
    if (const Value* v = s.find("hessian")) {
      line = v->line;
      if (v->kind != Value::Kind::array || v->items.size() != 2) {
        s.fail(v->line, "'hessian' must be a 2x2 array");
      }
      h.row(0) = s.to_vec2(v->items[0], "hessian").transpose();
      h.row(1) = s.to_vec2(v->items[1], "hessian").transpose();
    }
    if (const Value* v = s.find("center")) {
      center = s.to_vec2(*v, "center");
    }
    s.finish();
    try {
      cfg.field = ScalarField(h, center);
    } catch (const std::invalid_argument& e) {
      s.fail(line, e.what());
    }
  }

  for (Table& t : doc.arrays["obstacles"]) {
    Section s(&t, "[obstacles]", origin);
    Obstacle o;
    o.center = s.to_vec2(s.require("center"), "center");
    o.radius = s.to_number(s.require("radius"), "radius");
    s.finish();
    cfg.obstacles.push_back(o);
  }

  for (Table& t : doc.arrays["agents"]) {
    Section s(&t, "[agents]", origin);
    AgentInit a;
    a.position = s.to_vec2(s.require("position"), "position");
    const Value* deg = s.find("heading_deg");
    const Value* rad = s.find("heading_rad");
    if ((deg == nullptr) == (rad == nullptr)) {
      s.fail(t.line, "exactly one of 'heading_deg' and 'heading_rad' is required");
    }
    a.theta = deg ? s.to_number(*deg, "heading_deg") * std::numbers::pi / 180.0 : s.to_number(*rad, "heading_rad");
    s.number("v0", a.v0);
    s.finish();
    cfg.agents.push_back(a);
  }

  {
    Section s = section(doc, "gains", origin);
    ControlGains& g = cfg.gains;
    s.number("k_v", g.k_v);
    s.number("k_omega", g.k_omega);
    s.number("K_f", g.K_f);
    s.number("k1", g.k1);
    s.number("k2", g.k2);
    s.number("d_star", g.d_star);
    s.number("d_offset", g.d_offset);
    s.finish();
  }

  {
    Section s = section(doc, "safety", origin);
    SafetyParams& p = cfg.safety;
    s.number("d1", p.d1);
    s.number("d2", p.d2);
    s.number("d_r", p.d_r);
    s.number("r", p.r);
    s.number("kappa", p.kappa);
    s.number("v_floor", cfg.limits.v_floor);
    s.number("v_max", cfg.limits.v_max);
    s.number("omega_min", cfg.limits.omega_min);
    s.number("omega_max", cfg.limits.omega_max);
    s.number("gamma_ref", cfg.gamma_ref);
    s.finish();
  }

  {
    Section s = section(doc, "sim", origin);
    s.number("dt", cfg.dt);
    s.number("t_end", cfg.t_end);
    const std::size_t line = s.present() ? doc.tables["sim"].line : 0;
    auto key_line = [&](const std::string& key) {
      const Value* v = s.find(key);
      return v ? v->line : line;
    };

    const std::string graph = s.string("graph", "proximity");
    if (graph == "proximity") {
      cfg.graph_mode = GraphMode::proximity;
    } else if (graph == "static") {
      cfg.graph_mode = GraphMode::fixed;
    } else {
      s.fail(key_line("graph"), "graph must be \"static\" or \"proximity\"");
    }

    if (const Value* e = s.find("edges")) {
      if (cfg.graph_mode != GraphMode::fixed) {
        s.fail(e->line, "'edges' is only meaningful with graph = \"static\"");
      }
      if (e->kind == Value::Kind::string && e->str == "complete") {
        for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
          for (std::size_t j = i + 1; j < cfg.agents.size(); ++j) {
            cfg.fixed_edges.emplace_back(i, j);
          }
        }
      } else if (e->kind == Value::Kind::array) {
        for (const Value& pair : e->items) {
          if (pair.kind != Value::Kind::array || pair.items.size() != 2) {
            s.fail(pair.line, "'edges' must be \"complete\" or a list of [i, j] pairs");
          }
          cfg.fixed_edges.emplace_back(to_index(s, pair.items[0], "edges"), to_index(s, pair.items[1], "edges"));
        }
      } else {
        s.fail(e->line, "'edges' must be \"complete\" or a list of [i, j] pairs");
      }
    } else if (cfg.graph_mode == GraphMode::fixed) {
      s.fail(line, "graph = \"static\" requires 'edges'");
    }

    const std::string controller = s.string("controller", "unconstrained");
    try {
      cfg.controller = parse_controller(controller);
    } catch (const std::invalid_argument& e) {
      s.fail(key_line("controller"), e.what());
    }

    const std::string filter = s.string("filter", "qp");
    if (filter == "qp") {
      cfg.filter = SafetyFilter::qp;
    } else if (filter == "none") {
      cfg.filter = SafetyFilter::none;
    } else {
      s.fail(key_line("filter"), "filter must be \"qp\" or \"none\"");
    }
    s.finish();
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw ScenarioError(path.string(), 0, e.what());
  }
  return parse_scenario(text, path.string());
}

std::string dump_scenario(const ScenarioConfig& cfg) {
  std::ostringstream os;
  const Mat2& h = cfg.field.shape();
  os << "[field]\n";
  os << "hessian = [" << format_vec2(h.row(0).transpose()) << ", " << format_vec2(h.row(1).transpose()) << "]\n";
  os << "center = " << format_vec2(cfg.field.source()) << "\n";
  for (const Obstacle& o : cfg.obstacles) {
    os << "\n[[obstacles]]\ncenter = " << format_vec2(o.center) << "\nradius = " << format_double(o.radius) << "\n";
  }
  for (const AgentInit& a : cfg.agents) {
    os << "\n[[agents]]\nposition = " << format_vec2(a.position) << "\nheading_rad = " << format_double(a.theta)
       << "\nv0 = " << format_double(a.v0) << "\n";
  }
  const ControlGains& g = cfg.gains;
  os << "\n[gains]\n"
     << "k_v = " << format_double(g.k_v) << "\n"
     << "k_omega = " << format_double(g.k_omega) << "\n"
     << "K_f = " << format_double(g.K_f) << "\n"
     << "k1 = " << format_double(g.k1) << "\n"
     << "k2 = " << format_double(g.k2) << "\n"
     << "d_star = " << format_double(g.d_star) << "\n"
     << "d_offset = " << format_double(g.d_offset) << "\n";
  const SafetyParams& p = cfg.safety;
  os << "\n[safety]\n"
     << "d1 = " << format_double(p.d1) << "\n"
     << "d2 = " << format_double(p.d2) << "\n"
     << "d_r = " << format_double(p.d_r) << "\n"
     << "r = " << format_double(p.r) << "\n"
     << "kappa = " << format_double(p.kappa) << "\n"
     << "v_floor = " << format_double(cfg.limits.v_floor) << "\n"
     << "v_max = " << format_double(cfg.limits.v_max) << "\n"
     << "omega_min = " << format_double(cfg.limits.omega_min) << "\n"
     << "omega_max = " << format_double(cfg.limits.omega_max) << "\n"
     << "gamma_ref = " << format_double(cfg.gamma_ref) << "\n";
  os << "\n[sim]\n"
     << "dt = " << format_double(cfg.dt) << "\n"
     << "t_end = " << format_double(cfg.t_end) << "\n"
     << "graph = \"" << (cfg.graph_mode == GraphMode::fixed ? "static" : "proximity") << "\"\n";
  if (cfg.graph_mode == GraphMode::fixed) {
    os << "edges = [";
    for (std::size_t k = 0; k < cfg.fixed_edges.size(); ++k) {
      os << (k ? ", " : "") << "[" << cfg.fixed_edges[k].first << ", " << cfg.fixed_edges[k].second << "]";
    }
    os << "]\n";
  }
  os << "controller = \"" << controller_name(cfg.controller) << "\"\n"
     << "filter = \"" << (cfg.filter == SafetyFilter::none ? "none" : "qp") << "\"\n";
  return os.str();
}

}  // namespace flock
