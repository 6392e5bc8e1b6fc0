#include <fstream>
#include <sstream>

#include "hypertest/circuit.hpp"
#include "hypertest/text_util.hpp"

namespace hypertest {

namespace {

struct NetDecl {
  std::string name;
  unsigned width = 1;
  int line = 0;
  int col = 0;
};

struct PendingReg {
  NetDecl decl;
  std::uint64_t init = 0;
  std::string next, load, loaddata, loc;
  bool has_next = false;
};

struct PendingGate {
  std::string id;
  GateKind kind = GateKind::Not;
  GateParams params;
  std::vector<std::pair<std::string, int>> in, out;
  std::string loc;
  int line = 0;
};

class CktParser {
 public:
  explicit CktParser(std::string_view text) : text_(text) {}

  Circuit run() {
    std::istringstream is{std::string(text_)};
    std::string raw;
    int lineno = 0;
    bool ended = false;
    while (std::getline(is, raw)) {
      ++lineno;
      const std::string body = strip_comment(raw);
      int offset = 0;
      for (const auto& part : split(body, ';')) {
        auto toks = tokenize(part, offset);
        offset += static_cast<int>(part.size()) + 1;
        if (toks.empty()) continue;
        if (ended) {
          error(lineno, toks[0].col, "syntax error: statement after 'end'");
          continue;
        }
        statement(lineno, toks, ended);
      }
    }
    if (!diags_.empty()) throw DiagnosticError(diags_);
    return build();
  }

 private:
  void error(int line, int col, std::string msg) { diags_.push_back({line, col, std::move(msg)}); }

  bool parse_decl(int line, const Token& t, NetDecl& d) {
    auto colon = t.text.find(':');
    d.name = t.text.substr(0, colon);
    d.line = line;
    d.col = t.col;
    d.width = 1;
    if (!is_identifier(d.name)) {
      error(line, t.col, "syntax error: bad net name '" + d.name + "'");
      return false;
    }
    if (colon != std::string::npos) {
      auto w = parse_uint(t.text.substr(colon + 1), 10);
      if (!w || *w < 1 || *w > kMaxWidth) {
        error(line, t.col + static_cast<int>(colon) + 1, "width mismatch: width must be 1..64");
        return false;
      }
      d.width = static_cast<unsigned>(*w);
    }
    return true;
  }

  void statement(int line, const std::vector<Token>& toks, bool& ended) {
    const std::string& kw = toks[0].text;
    if (kw == "circuit") {
      if (toks.size() != 2 || !is_identifier(toks[1].text))
        return error(line, toks[0].col, "syntax error: expected 'circuit <name>'");
      name_ = toks[1].text;
    } else if (kw == "input" || kw == "output" || kw == "wire") {
      if (toks.size() != 2) return error(line, toks[0].col, "syntax error: expected '" + kw + " <net>[:<w>]'");
      NetDecl d;
      if (!parse_decl(line, toks[1], d)) return;
      if (kw == "input") inputs_.push_back(d);
      else if (kw == "output") outputs_.push_back(d);
      else wires_.push_back(d);
    } else if (kw == "reg") {
      if (toks.size() < 2) return error(line, toks[0].col, "syntax error: expected 'reg <net>[:<w>] init=<hex> next=<net>'");
      PendingReg r;
      if (!parse_decl(line, toks[1], r.decl)) return;
      bool has_init = false;
      for (std::size_t i = 2; i < toks.size(); ++i) {
        auto [k, v] = split_kv(toks[i].text);
        if (k == "init") {
          auto x = parse_hex(v);
          if (!x) return error(line, toks[i].col, "syntax error: bad init value");
          r.init = *x;
          has_init = true;
        } else if (k == "next") {
          r.next = v;
          r.has_next = true;
        } else if (k == "load") {
          r.load = v;
        } else if (k == "loaddata") {
          r.loaddata = v;
        } else if (k == "loc") {
          r.loc = v;
        } else {
          return error(line, toks[i].col, "syntax error: unknown register attribute '" + toks[i].text + "'");
        }
      }
      if (!has_init) return error(line, toks[0].col, "syntax error: register needs init=<hex>");
      if (!r.has_next) return error(line, toks[0].col, "syntax error: register needs next=<net>");
      regs_.push_back(std::move(r));
    } else if (kw == "gate") {
      gate(line, toks);
    } else if (kw == "end") {
      if (toks.size() != 1) return error(line, toks[1].col, "syntax error: trailing tokens after 'end'");
      ended = true;
    } else {
      error(line, toks[0].col, "syntax error: unknown statement '" + kw + "'");
    }
  }

  static std::vector<std::pair<std::string, int>> net_list(const std::string& v, int col, bool& ok) {
    std::vector<std::pair<std::string, int>> out;
    ok = v.size() >= 2 && v.front() == '(' && v.back() == ')';
    if (!ok) return out;
    auto inner = v.substr(1, v.size() - 2);
    if (trim(inner).empty()) return out;
    std::size_t pos = 0;
    for (auto& part : split(inner, ',')) {
      auto name = trim(part);
      if (!is_identifier(name)) ok = false;
      out.emplace_back(name, col + static_cast<int>(pos));
      pos += part.size() + 1;
    }
    return out;
  }

  void gate(int line, const std::vector<Token>& toks) {
    if (toks.size() < 2 || !is_identifier(toks[1].text))
      return error(line, toks[0].col, "syntax error: expected 'gate <id> kind=<KIND> ...'");
    PendingGate g;
    g.id = toks[1].text;
    g.line = line;
    bool has_kind = false, has_in = false, has_out = false;
    for (std::size_t i = 2; i < toks.size(); ++i) {
      auto [k, v] = split_kv(toks[i].text);
      const int vcol = toks[i].col + static_cast<int>(k.size()) + 1;
      if (k == "kind") {
        auto kind = kind_from_name(v);
        if (!kind) return error(line, vcol, "unknown kind '" + v + "'");
        g.kind = *kind;
        has_kind = true;
      } else if (k == "in" || k == "out") {
        bool ok = false;
        auto nets = net_list(v, vcol + 1, ok);
        if (!ok) return error(line, vcol, "syntax error: expected " + k + "=(<net>,...)");
        (k == "in" ? g.in : g.out) = std::move(nets);
        (k == "in" ? has_in : has_out) = true;
      } else if (k == "value") {
        auto x = parse_hex(v);
        if (!x) return error(line, vcol, "syntax error: bad value");
        g.params.value = *x;
      } else if (k == "lo") {
        auto x = parse_uint(v, 10);
        if (!x || *x > 63) return error(line, vcol, "syntax error: bad lo");
        g.params.lo = static_cast<unsigned>(*x);
      } else if (k == "arms") {
        for (auto& a : split(v, ',')) {
          auto x = parse_hex(trim(a));
          if (!x) return error(line, vcol, "syntax error: bad arm value '" + a + "'");
          g.params.arms.push_back(*x);
        }
      } else if (k == "loc") {
        g.loc = v;
      } else {
        return error(line, toks[i].col, "syntax error: unknown gate attribute '" + toks[i].text + "'");
      }
    }
    if (!has_kind) return error(line, toks[0].col, "syntax error: gate needs kind=");
    if (!has_out) return error(line, toks[0].col, "syntax error: gate needs out=(...)");
    if (!has_in) g.in.clear();
    gates_.push_back(std::move(g));
  }

  Circuit build() {
    CircuitBuilder b(name_.empty() ? "top" : name_);
    auto declare = [&](const NetDecl& d) -> std::optional<NetId> {
      if (b.find_net(d.name)) {
        error(d.line, d.col, "duplicate declaration of net '" + d.name + "'");
        return std::nullopt;
      }
      return b.add_net(d.name, d.width);
    };
    for (const auto& d : inputs_)
      if (auto id = declare(d)) b.add_port(d.name, PortDir::Input, *id);
    for (const auto& d : outputs_)
      if (auto id = declare(d)) b.add_port(d.name, PortDir::Output, *id);
    for (const auto& d : wires_) declare(d);
    std::vector<NetId> reg_q;
    for (const auto& r : regs_) {
      auto existing = b.find_net(r.decl.name);
      bool is_output = false;
      for (const auto& o : outputs_) is_output |= o.name == r.decl.name;
      if (existing && is_output) {
        reg_q.push_back(*existing);
      } else if (auto id = declare(r.decl)) {
        reg_q.push_back(*id);
      } else {
        reg_q.push_back(0);
      }
    }
    auto resolve = [&](const std::string& name, int line, int col) -> std::optional<NetId> {
      auto id = b.find_net(name);
      if (!id) error(line, col, "unknown net '" + name + "'");
      return id;
    };
    for (const auto& pg : gates_) {
      GateInstance g;
      g.id = pg.id;
      g.kind = pg.kind;
      g.params = pg.params;
      g.loc = pg.loc;
      g.line = pg.line;
      bool ok = true;
      for (const auto& [n, col] : pg.in) {
        auto id = resolve(n, pg.line, col);
        ok &= id.has_value();
        if (id) g.inputs.push_back(*id);
      }
      for (const auto& [n, col] : pg.out) {
        auto id = resolve(n, pg.line, col);
        ok &= id.has_value();
        if (id) g.outputs.push_back(*id);
      }
      if (ok) b.add_gate(std::move(g));
    }
    for (std::size_t i = 0; i < regs_.size(); ++i) {
      const auto& pr = regs_[i];
      StorageElement r;
      r.name = pr.decl.name;
      r.q = reg_q[i];
      r.init = pr.init;
      r.loc = pr.loc;
      r.line = pr.decl.line;
      auto next = resolve(pr.next, r.line, 1);
      if (!next) continue;
      r.next = *next;
      if (!pr.load.empty()) r.load = resolve(pr.load, r.line, 1);
      if (!pr.loaddata.empty()) r.loaddata = resolve(pr.loaddata, r.line, 1);
      if (r.load.has_value() != r.loaddata.has_value()) {
        error(r.line, 1, "register " + r.name + ": load and loaddata must be given together");
        continue;
      }
      b.add_register(std::move(r));
    }
    if (!diags_.empty()) throw DiagnosticError(diags_);
    Circuit c = std::move(b).build();
    auto v = validate(c);
    if (!v.empty()) throw DiagnosticError(v);
    return c;
  }

  std::string_view text_;
  std::vector<Diagnostic> diags_;
  std::string name_;
  std::vector<NetDecl> inputs_, outputs_, wires_;
  std::vector<PendingReg> regs_;
  std::vector<PendingGate> gates_;
};

}  // namespace

Circuit parse_circuit(std::string_view text) { return CktParser(text).run(); }

Circuit load_circuit(const std::string& path) { return parse_circuit(read_file(path)); }

std::string print_circuit(const Circuit& c) {
  std::ostringstream os;
  auto decl = [&](NetId n) { return c.net(n).name + ":" + std::to_string(c.width(n)); };
  os << "circuit " << c.name() << "\n";
  std::vector<bool> declared(c.nets().size(), false);
  for (const auto& p : c.ports()) {
    os << (p.dir == PortDir::Input ? "input " : "output ") << decl(p.net) << "\n";
    declared[p.net] = true;
  }
  std::vector<bool> is_reg(c.nets().size(), false);
  for (const auto& r : c.registers()) is_reg[r.q] = true;
  for (NetId n = 0; n < c.nets().size(); ++n)
    if (!declared[n] && !is_reg[n] && !c.net(n).implicit) os << "wire " << decl(n) << "\n";
  for (const auto& r : c.registers()) {
    os << "reg " << decl(r.q) << " init=" << hex(r.init) << " next=" << c.net(r.next).name;
    if (r.load) os << " load=" << c.net(*r.load).name << " loaddata=" << c.net(*r.loaddata).name;
    if (!r.loc.empty()) os << " loc=" << r.loc;
    os << "\n";
  }
  for (const auto& g : c.gates()) {
    if (g.implicit) continue;
    os << "gate " << g.id << " kind=" << kind_name(g.kind);
    if (g.kind == GateKind::Const) os << " value=" << hex(g.params.value);
    if (g.kind == GateKind::Slice) os << " lo=" << g.params.lo;
    if (g.kind == GateKind::Case) {
      os << " arms=";
      for (std::size_t i = 0; i < g.params.arms.size(); ++i)
        os << (i ? "," : "") << hex(g.params.arms[i]);
    }
    os << " in=(";
    for (std::size_t i = 0; i < g.inputs.size(); ++i) os << (i ? "," : "") << c.net(g.inputs[i]).name;
    os << ") out=(";
    for (std::size_t i = 0; i < g.outputs.size(); ++i) os << (i ? "," : "") << c.net(g.outputs[i]).name;
    os << ")";
    if (!g.loc.empty()) os << " loc=" << g.loc;
    os << "\n";
  }
  os << "end\n";
  return os.str();
}

}  // namespace hypertest
