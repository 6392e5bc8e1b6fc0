#include "hypertest/covdb.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>

#include "json.hpp"

#include "hypertest/text_util.hpp"

namespace hypertest {

namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "gcdb v1";

[[noreturn]] void fail(int line, std::string msg) { throw DiagnosticError({Diagnostic{line, 1, std::move(msg)}}); }

std::string word_hex(std::uint64_t w) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k, w >>= 4) s[static_cast<std::size_t>(k)] = digits[w & 15];
  return s;
}

}  // namespace

CoverageDb CoverageDb::for_universe(const GifUniverse& u) {
  DbHeader h;
  h.circuit = u.circuit;
  h.hash = u.hash;
  h.mode = std::string(gif_mode_name(u.options.mode));
  h.model = std::string(gif_model_name(u.options.model));
  h.items = u.size();
  return CoverageDb(std::move(h));
}

const DbTest* CoverageDb::find(std::string_view name) const {
  auto it = std::lower_bound(tests_.begin(), tests_.end(), name,
                             [](const DbTest& t, std::string_view n) { return t.name < n; });
  return it != tests_.end() && it->name == name ? &*it : nullptr;
}

void CoverageDb::add(DbTest t) {
  if (!is_identifier(t.name)) throw std::invalid_argument("invalid test name '" + t.name + "'");
  if (t.covered.size() != header_.items)
    throw std::invalid_argument("test '" + t.name + "' has " + std::to_string(t.covered.size()) +
                                " items, database has " + std::to_string(header_.items));
  auto it = std::lower_bound(tests_.begin(), tests_.end(), t.name,
                             [](const DbTest& a, const std::string& n) { return a.name < n; });
  if (it != tests_.end() && it->name == t.name) {
    it->covered |= t.covered;
    it->cycles = std::max(it->cycles, t.cycles);
  } else {
    tests_.insert(it, std::move(t));
  }
}

void CoverageDb::add(const CoverageSet& cs) {
  if (cs.universe_hash != header_.hash) throw std::invalid_argument("coverage set hash does not match the database");
  add(DbTest{cs.test, cs.cycles, cs.covered});
}

Bitset CoverageDb::accumulate(const std::vector<std::string>& names) const {
  Bitset acc(header_.items);
  for (const auto& n : names) {
    const DbTest* t = find(n);
    if (!t) throw std::out_of_range("unknown test '" + n + "'");
    acc |= t->covered;
  }
  return acc;
}

Bitset CoverageDb::accumulate_all() const {
  Bitset acc(header_.items);
  for (const auto& t : tests_) acc |= t.covered;
  return acc;
}

std::string print_db(const CoverageDb& db) {
  const DbHeader& h = db.header();
  std::string out;
  out += std::string(kMagic) + "\n";
  out += "circuit " + h.circuit + "\n";
  out += "hash " + h.hash + "\n";
  out += "mode " + h.mode + "\n";
  out += "model " + h.model + "\n";
  out += "tool " + h.tool + "\n";
  out += "items " + std::to_string(h.items) + "\n";
  for (const auto& t : db.tests()) {
    out += "test " + t.name + " cycles=" + std::to_string(t.cycles) + "\n";
    for (std::uint64_t w : t.covered.words()) out += "cov " + word_hex(w) + "\n";
  }
  out += "checksum " + sha256_hex(out) + "\n";
  return out;
}

CoverageDb parse_db(std::string_view text, std::string_view expected_hash) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (lines.empty() || lines[0] != kMagic) {
    if (!lines.empty() && lines[0].starts_with("gcdb "))
      fail(1, "unsupported database version '" + std::string(lines[0].substr(5)) + "', expected v1");
    fail(1, "not a gcdb file");
  }
  if (lines.size() < 2 || !lines.back().starts_with("checksum "))
    fail(static_cast<int>(lines.size()), "missing checksum line");
  std::size_t body_end = text.size() - lines.back().size() - (text.ends_with('\n') ? 1 : 0);
  if (sha256_hex(text.substr(0, body_end)) != lines.back().substr(9))
    fail(static_cast<int>(lines.size()), "checksum mismatch, file is corrupt");

  DbHeader h;
  const std::pair<std::string_view, std::string*> fields[] = {
      {"circuit", &h.circuit}, {"hash", &h.hash}, {"mode", &h.mode}, {"model", &h.model}, {"tool", &h.tool}};
  std::size_t ln = 1;
  for (const auto& [key, dst] : fields) {
    if (ln >= lines.size() - 1 || !lines[ln].starts_with(std::string(key) + " "))
      fail(static_cast<int>(ln + 1), "expected '" + std::string(key) + "'");
    *dst = std::string(lines[ln].substr(key.size() + 1));
    ++ln;
  }
  if (ln >= lines.size() - 1 || !lines[ln].starts_with("items ")) fail(static_cast<int>(ln + 1), "expected 'items'");
  auto items = parse_uint(lines[ln].substr(6), 10);
  if (!items) fail(static_cast<int>(ln + 1), "bad item count");
  h.items = *items;
  ++ln;
  if (!expected_hash.empty() && h.hash != expected_hash)
    fail(3, "universe hash " + h.hash + " does not match " + std::string(expected_hash));

  CoverageDb db(h);
  const std::size_t nwords = (h.items + 63) / 64;
  const std::size_t last = lines.size() - 1;
  while (ln < last) {
    auto toks = split(lines[ln], ' ');
    int line_no = static_cast<int>(ln + 1);
    if (toks.size() != 3 || toks[0] != "test" || !toks[2].starts_with("cycles=")) fail(line_no, "expected 'test <name> cycles=<n>'");
    auto cycles = parse_uint(std::string_view(toks[2]).substr(7), 10);
    if (!cycles) fail(line_no, "bad cycle count");
    if (!is_identifier(toks[1])) fail(line_no, "invalid test name '" + toks[1] + "'");
    if (db.find(toks[1])) fail(line_no, "duplicate test '" + toks[1] + "'");
    DbTest t{toks[1], *cycles, Bitset(h.items)};
    ++ln;
    for (std::size_t w = 0; w < nwords; ++w, ++ln) {
      if (ln >= last || !lines[ln].starts_with("cov ") || lines[ln].size() != 20)
        fail(static_cast<int>(ln + 1), "expected 'cov <16 hex digits>'");
      auto v = parse_uint(lines[ln].substr(4), 16);
      if (!v) fail(static_cast<int>(ln + 1), "bad coverage word");
      t.covered.words()[w] = *v;
    }
    if (h.items % 64 && nwords && (t.covered.words().back() >> (h.items % 64)))
      fail(static_cast<int>(ln), "coverage bits beyond the item count");
    db.add(std::move(t));
  }
  return db;
}

void write_db(const CoverageDb& db, const std::string& path) { write_file_atomic(path, print_db(db)); }

CoverageDb read_db(const std::string& path, std::string_view expected_hash) {
  try {
    return parse_db(read_file(path), expected_hash);
  } catch (const DiagnosticError& e) {
    std::vector<Diagnostic> d = e.diagnostics();
    for (auto& x : d) x.message = path + ": " + x.message;
    throw DiagnosticError(std::move(d));
  }
}

CoverageDb merge(const std::vector<CoverageDb>& dbs) {
  if (dbs.empty()) throw std::invalid_argument("nothing to merge");
  CoverageDb out(dbs[0].header());
  for (const auto& db : dbs) {
    if (!(db.header() == out.header()))
      throw std::invalid_argument("cannot merge databases with different headers (hash " + db.header().hash +
                                  " vs " + out.header().hash + ")");
    for (const auto& t : db.tests()) out.add(t);
  }
  return out;
}

CoverageDb merge(const CoverageDb& a, const CoverageDb& b) { return merge(std::vector<CoverageDb>{a, b}); }

const HierNode* HierNode::find(std::string_view p) const {
  if (p == path) return this;
  for (const auto& c : children)
    if (path_contains(c.path, p)) return c.find(p);
  return nullptr;
}

std::string percent(std::size_t covered, std::size_t total) {
  if (total == 0) return "0.00";
  std::uint64_t bp = (std::uint64_t{covered} * 20000 + total) / (2 * std::uint64_t{total});
  std::string frac = std::to_string(bp % 100);
  if (frac.size() < 2) frac = "0" + frac;
  return std::to_string(bp / 100) + "." + frac;
}

bool path_contains(std::string_view path, std::string_view item_path) {
  if (path.empty()) return true;
  return item_path == path || (item_path.starts_with(path) && item_path.size() > path.size() && item_path[path.size()] == '.');
}

HierNode report_hierarchy(const GifUniverse& u, const Bitset& covered) {
  if (covered.size() != u.size()) throw std::invalid_argument("coverage size does not match the universe");
  HierNode root;
  for (std::size_t k = 0; k < u.size(); ++k) {
    HierNode* n = &root;
    const std::string& p = u.item_path(k);
    if (!p.empty()) {
      std::string prefix;
      for (const auto& seg : split(p, '.')) {
        prefix = prefix.empty() ? seg : prefix + "." + seg;
        auto it = std::find_if(n->children.begin(), n->children.end(), [&](const HierNode& c) { return c.name == seg; });
        if (it == n->children.end()) {
          HierNode child;
          child.path = prefix;
          child.name = seg;
          n->children.push_back(std::move(child));
          it = n->children.end() - 1;
        }
        n = &*it;
      }
    }
    ++n->own_total;
    if (covered.test(k)) ++n->own_covered;
  }
  auto finish = [](auto&& self, HierNode& n) -> void {
    std::sort(n.children.begin(), n.children.end(), [](const HierNode& a, const HierNode& b) { return a.name < b.name; });
    n.total = n.own_total;
    n.covered = n.own_covered;
    for (auto& c : n.children) {
      self(self, c);
      n.total += c.total;
      n.covered += c.covered;
    }
  };
  finish(finish, root);
  return root;
}

std::string print_hierarchy(const HierNode& root) {
  std::string out;
  auto walk = [&](auto&& self, const HierNode& n) -> void {
    out += (n.path.empty() ? std::string(".") : n.path) + " " + std::to_string(n.covered) + "/" +
           std::to_string(n.total) + " " + percent(n.covered, n.total) + "%\n";
    for (const auto& c : n.children) self(self, c);
  };
  walk(walk, root);
  return out;
}

namespace {

json tree_json(const HierNode& n) {
  json j = {{"path", n.path},           {"name", n.name},   {"total", n.total},
            {"covered", n.covered},     {"own_total", n.own_total},
            {"own_covered", n.own_covered}, {"percent", percent(n.covered, n.total)}};
  j["children"] = json::array();
  for (const auto& c : n.children) j["children"].push_back(tree_json(c));
  return j;
}

HierNode tree_from(const json& j) {
  HierNode n;
  n.path = j.at("path").get<std::string>();
  n.name = j.at("name").get<std::string>();
  n.total = j.at("total").get<std::size_t>();
  n.covered = j.at("covered").get<std::size_t>();
  n.own_total = j.at("own_total").get<std::size_t>();
  n.own_covered = j.at("own_covered").get<std::size_t>();
  for (const auto& c : j.at("children")) n.children.push_back(tree_from(c));
  return n;
}

ApiResponse error(int status, const std::string& msg) { return {status, json{{"error", msg}}.dump()}; }

}  // namespace

HierNode hierarchy_from_json(std::string_view text) { return tree_from(json::parse(text)); }

CoverageApi::CoverageApi(CoverageDb db, GifUniverse u) : db_(std::move(db)), u_(std::move(u)) {
  if (db_.header().hash != u_.hash) throw std::invalid_argument("database hash does not match the universe");
}

ApiResponse CoverageApi::get(std::string_view route, const std::map<std::string, std::string>& query) const {
  auto selection = [&](Bitset& out) -> std::optional<ApiResponse> {
    auto it = query.find("tests");
    if (it == query.end() || it->second == "all") {
      out = db_.accumulate_all();
      return std::nullopt;
    }
    out = Bitset(u_.size());
    for (const auto& n : split(it->second, ',')) {
      if (n.empty()) continue;
      const DbTest* t = db_.find(n);
      if (!t) return error(400, "unknown test '" + n + "'");
      out |= t->covered;
    }
    return std::nullopt;
  };

  if (route == "/api/meta") {
    const DbHeader& h = db_.header();
    return {200, json{{"circuit", h.circuit}, {"hash", h.hash},   {"mode", h.mode},
                      {"model", h.model},     {"tool", h.tool},   {"items", h.items},
                      {"tests", db_.tests().size()}}
                     .dump()};
  }
  if (route == "/api/tests") {
    json arr = json::array();
    for (const auto& t : db_.tests()) arr.push_back({{"name", t.name}, {"cycles", t.cycles}, {"covered", t.covered.count()}});
    return {200, arr.dump()};
  }
  if (route == "/api/tree") {
    Bitset cov;
    if (auto err = selection(cov)) return *err;
    return {200, tree_json(report_hierarchy(u_, cov)).dump()};
  }
  if (route == "/api/items") {
    Bitset cov;
    if (auto err = selection(cov)) return *err;
    std::string path;
    if (auto it = query.find("path"); it != query.end()) path = it->second;
    std::optional<bool> want;
    if (auto it = query.find("covered"); it != query.end() && !it->second.empty()) {
      if (it->second == "true") want = true;
      else if (it->second == "false") want = false;
      else return error(400, "covered must be true or false");
    }
    bool known = path.empty();
    json arr = json::array();
    for (std::size_t k = 0; k < u_.size(); ++k) {
      if (!path_contains(path, u_.item_path(k))) continue;
      known = true;
      bool c = cov.test(k);
      if (want && *want != c) continue;
      const GifGateInfo& g = u_.gates[u_.core_of(k).gate];
      arr.push_back({{"index", k}, {"item", u_.item_string(k)}, {"path", g.path},
                     {"kind", std::string(kind_name(g.kind))}, {"covered", c}});
    }
    if (!known) return error(400, "unknown path '" + path + "'");
    return {200, json{{"path", path}, {"items", arr}}.dump()};
  }
  return error(404, "no route " + std::string(route));
}

}  // namespace hypertest
