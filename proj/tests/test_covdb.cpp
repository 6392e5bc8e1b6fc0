#include <doctest.h>

#include <filesystem>
#include <random>
#include <thread>

#include "json.hpp"
#include "httplib.h"

#include "helpers.hpp"
#include "hypertest/covdb.hpp"
#include "hypertest/text_util.hpp"

using namespace hypertest;

namespace {

DbHeader header(std::size_t items, std::string hash = "abc123") {
  DbHeader h;
  h.circuit = "c";
  h.hash = std::move(hash);
  h.mode = "site";
  h.model = "po";
  h.items = items;
  return h;
}

CoverageDb random_db(std::mt19937_64& rng, std::size_t items) {
  CoverageDb db(header(items));
  const std::size_t ntests = rng() % 5;
  for (std::size_t t = 0; t < ntests; ++t) {
    DbTest x{"t" + std::to_string(rng() % 6), rng() % 1000, Bitset(items)};
    for (std::size_t k = 0; k < items; ++k)
      if (rng() % 3 == 0) x.covered.set(k);
    db.add(std::move(x));
  }
  return db;
}

struct Corpus {
  Circuit c = testutil::load("loopback");
  GifUniverse u = enumerate_gifs(c, GifOptions{});
  std::vector<VectorProgram> tests = {testutil::random_program(c, 10, 1, "alpha"),
                                      testutil::random_program(c, 30, 2, "beta"),
                                      testutil::random_program(c, 5, 3, "gamma")};
  CoverageDb db = [this] {
    CoverageDb d = CoverageDb::for_universe(u);
    for (const auto& cs : gif_fault_sim(c, tests, u)) d.add(cs);
    return d;
  }();
};

const Corpus& corpus() {
  static const Corpus k;
  return k;
}

void check_rollup(const HierNode& n) {
  std::size_t t = n.own_total, cv = n.own_covered;
  for (const auto& ch : n.children) {
    check_rollup(ch);
    t += ch.total;
    cv += ch.covered;
  }
  CHECK(n.total == t);
  CHECK(n.covered == cv);
  CHECK(n.covered <= n.total);
}

}  // namespace

TEST_CASE("gcdb round trip") {
  std::mt19937_64 rng(42);
  SUBCASE("one test") {
    CoverageDb db(header(130));
    DbTest t{"only", 12, Bitset(130)};
    t.covered.set(0);
    t.covered.set(64);
    t.covered.set(129);
    db.add(t);
    CHECK(parse_db(print_db(db)) == db);
    CHECK(print_db(db).find("cov ") != std::string::npos);
  }
  SUBCASE("random dbs through files") {
    auto dir = std::filesystem::temp_directory_path() / "gcdb_rt";
    std::filesystem::create_directories(dir);
    for (int k = 0; k < 50; ++k) {
      CoverageDb db = random_db(rng, static_cast<std::size_t>(rng() % 200));
      std::string path = (dir / ("db" + std::to_string(k) + ".gcdb")).string();
      write_db(db, path);
      CHECK(read_db(path) == db);
    }
    std::filesystem::remove_all(dir);
  }
  SUBCASE("empty universe") {
    CoverageDb db(header(0));
    db.add(DbTest{"x", 1, Bitset(0)});
    CHECK(parse_db(print_db(db)) == db);
  }
}

TEST_CASE("gcdb rejects bad files") {
  CoverageDb db(header(70));
  db.add(DbTest{"t", 3, Bitset(70)});
  const std::string good = print_db(db);
  auto replaced = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  CHECK_THROWS_AS(parse_db(replaced("hash abc123", "hash abc124")), DiagnosticError);
  CHECK_THROWS_AS(parse_db(replaced("cycles=3", "cycles=4")), DiagnosticError);
  CHECK_THROWS_AS(parse_db(replaced("gcdb v1", "gcdb v2")), DiagnosticError);
  CHECK_THROWS_AS(parse_db(good.substr(0, good.size() / 2)), DiagnosticError);
  CHECK_THROWS_AS(parse_db(good, "ffff"), DiagnosticError);
  CHECK_NOTHROW(parse_db(good, "abc123"));
  try {
    parse_db(replaced("gcdb v1", "gcdb v2"));
  } catch (const DiagnosticError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }

  std::string body = "gcdb v1\ncircuit c\nhash abc123\nmode site\nmodel po\ntool x\nitems 3\ntest t cycles=1\ncov 0000000000000008\n";
  CHECK_THROWS_AS(parse_db(body + "checksum " + sha256_hex(body) + "\n"), DiagnosticError);
}

TEST_CASE("merge algebra") {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 500; ++iter) {
    const std::size_t items = rng() % 150;
    CoverageDb a = random_db(rng, items), b = random_db(rng, items), c = random_db(rng, items);
    CoverageDb empty(header(items));
    CHECK(merge(a, empty) == a);
    CHECK(merge(a, b) == merge(b, a));
    CHECK(merge(a, a) == a);
    CHECK(merge(merge(a, b), c) == merge(a, merge(b, c)));
    CHECK(merge({a, b, c}) == merge(merge(a, b), c));
    CHECK(merge(parse_db(print_db(a)), parse_db(print_db(b))) == merge(a, b));
    CHECK(merge(a, b).accumulate_all() == [&] {
      Bitset x = a.accumulate_all();
      x |= b.accumulate_all();
      return x;
    }());
  }
  CHECK_THROWS_AS(merge(CoverageDb(header(4)), CoverageDb(header(4, "other"))), std::invalid_argument);
}

TEST_CASE("merged per-test runs equal one accumulated run") {
  const Corpus& k = corpus();
  GifSimulator sim(k.c, k.u);
  Bitset acc(k.u.size());
  for (const auto& p : k.tests) sim.run(rtl_frames(k.c, p), acc);
  std::vector<CoverageDb> parts;
  for (const auto& cs : gif_fault_sim(k.c, k.tests, k.u)) {
    CoverageDb d = CoverageDb::for_universe(k.u);
    d.add(cs);
    parts.push_back(d);
  }
  CHECK(merge(parts).accumulate_all() == acc);
  CHECK(merge(parts) == k.db);
}

TEST_CASE("hierarchy report") {
  const Corpus& k = corpus();
  SUBCASE("no tests selected is all zero") {
    HierNode r = report_hierarchy(k.u, Bitset(k.u.size()));
    CHECK(r.total == k.u.size());
    auto zero = [](auto&& self, const HierNode& n) -> void {
      CHECK(n.covered == 0);
      CHECK(percent(n.covered, n.total) == "0.00");
      for (const auto& c : n.children) self(self, c);
    };
    zero(zero, r);
  }
  SUBCASE("a fully covered subtree is 100% and leaves siblings alone") {
    Bitset base = k.db.accumulate_all();
    HierNode before = report_hierarchy(k.u, base);
    REQUIRE(!before.children.empty());
    const HierNode* top = &before;
    while (top->children.size() == 1) top = &top->children[0];
    REQUIRE(top->children.size() >= 2);
    const HierNode& target = top->children[0];
    Bitset more = base;
    for (std::size_t i = 0; i < k.u.size(); ++i)
      if (path_contains(target.path, k.u.item_path(i))) more.set(i);
    HierNode after = report_hierarchy(k.u, more);
    CHECK(after.find(target.path)->covered == after.find(target.path)->total);
    CHECK(percent(after.find(target.path)->covered, after.find(target.path)->total) == "100.00");
    for (std::size_t s = 1; s < top->children.size(); ++s)
      CHECK(*after.find(top->children[s].path) == top->children[s]);
  }
  SUBCASE("rollup is consistent for random selections") {
    std::mt19937_64 rng(3);
    for (int iter = 0; iter < 50; ++iter) {
      Bitset sel(k.u.size());
      for (std::size_t i = 0; i < k.u.size(); ++i)
        if (rng() % 2) sel.set(i);
      check_rollup(report_hierarchy(k.u, sel));
    }
  }
  SUBCASE("percent rounds half up") {
    CHECK(percent(1, 3) == "33.33");
    CHECK(percent(2, 3) == "66.67");
    CHECK(percent(1, 8) == "12.50");
    CHECK(percent(1, 16) == "6.25");
    CHECK(percent(1, 1600) == "0.06");
    CHECK(percent(5, 5) == "100.00");
  }
  SUBCASE("path prefixes respect segment boundaries") {
    CHECK(path_contains("a.b", "a.b"));
    CHECK(path_contains("a.b", "a.b.c"));
    CHECK(!path_contains("a.b", "a.bc"));
    CHECK(path_contains("", "x"));
  }
}

TEST_CASE("coverage api") {
  const Corpus& k = corpus();
  CoverageApi api(k.db, k.u);
  auto get = [&](const std::string& route, std::map<std::string, std::string> q = {}) { return api.get(route, q); };
  using nlohmann::json;

  SUBCASE("meta and tests") {
    auto meta = json::parse(get("/api/meta").body);
    CHECK(meta["hash"] == k.u.hash);
    CHECK(meta["items"] == k.u.size());
    auto tests = json::parse(get("/api/tests").body);
    REQUIRE(tests.size() == 3);
    CHECK(tests[0]["name"] == "alpha");
    CHECK(tests[1]["cycles"] == 30);
  }
  SUBCASE("tree") {
    HierNode none = hierarchy_from_json(get("/api/tree", {{"tests", ""}}).body);
    CHECK(none.covered == 0);
    HierNode all = hierarchy_from_json(get("/api/tree", {{"tests", "all"}}).body);
    HierNode direct = report_hierarchy(k.u, k.db.accumulate_all());
    CHECK(all == direct);
    CHECK(print_hierarchy(all) == print_hierarchy(direct));
    HierNode two = hierarchy_from_json(get("/api/tree", {{"tests", "alpha,gamma"}}).body);
    CHECK(two == report_hierarchy(k.u, k.db.accumulate({"alpha", "gamma"})));
    check_rollup(two);
  }
  SUBCASE("items") {
    auto all = json::parse(get("/api/items").body)["items"];
    CHECK(all.size() == k.u.size());
    auto open = json::parse(get("/api/items", {{"covered", "false"}, {"tests", "beta"}}).body)["items"];
    Bitset beta = k.db.accumulate({"beta"});
    CHECK(open.size() == k.u.size() - beta.count());
    for (const auto& it : open) {
      CHECK(it["covered"] == false);
      CHECK(it["item"] == k.u.item_string(it["index"].get<std::size_t>()));
    }
    const std::string path = k.u.item_path(0);
    auto sub = json::parse(get("/api/items", {{"path", path}}).body)["items"];
    CHECK(sub.size() == report_hierarchy(k.u, beta).find(path)->total);
  }
  SUBCASE("errors") {
    CHECK(get("/api/tree", {{"tests", "nope"}}).status == 400);
    CHECK(get("/api/items", {{"path", "no.such.path"}}).status == 400);
    CHECK(get("/api/items", {{"covered", "maybe"}}).status == 400);
    CHECK(get("/api/what").status == 404);
  }
  SUBCASE("responses are pure") {
    for (const char* r : {"/api/meta", "/api/tests", "/api/tree", "/api/items"})
      CHECK(get(r, {{"tests", "alpha"}}).body == get(r, {{"tests", "alpha"}}).body);
  }
  SUBCASE("hash mismatch") {
    CoverageDb other(header(k.u.size(), "0000"));
    CHECK_THROWS_AS(CoverageApi(other, k.u), std::invalid_argument);
  }
}

TEST_CASE("coverage api over http") {
  const Corpus& k = corpus();
  CoverageApi api(k.db, k.u);
  ApiServer server(api);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread th([&] { server.listen(); });
  httplib::Client cli("127.0.0.1", port);
  auto res = cli.Get("/api/tests");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body == api.get("/api/tests", {}).body);
  auto tree = cli.Get("/api/tree?tests=alpha,beta");
  REQUIRE(tree);
  CHECK(tree->body == api.get("/api/tree", {{"tests", "alpha,beta"}}).body);
  auto bad = cli.Get("/api/tree?tests=zzz");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  auto missing = cli.Get("/api/nothing");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  server.stop();
  th.join();
}

TEST_CASE("bundled loopback tests") {
  Circuit c = testutil::load("loopback");
  GifUniverse u = enumerate_gifs(c, GifOptions{});
  auto tests = load_vector_dir(testutil::corpus("tests/loopback"));
  REQUIRE(tests.size() == 4);
  CoverageDb db = CoverageDb::for_universe(u);
  for (const auto& cs : gif_fault_sim(c, tests, u)) db.add(cs);

  GifSimulator sim(c, u);
  Bitset acc(u.size());
  for (const auto& p : tests) sim.run(rtl_frames(c, p), acc);
  CHECK(db.accumulate_all() == acc);

  CHECK(print_hierarchy(report_hierarchy(u, acc)) ==
        ". 134/202 66.34%\n"
        "lb 134/202 66.34%\n"
        "lb.loop 10/16 62.50%\n"
        "lb.rx 40/48 83.33%\n"
        "lb.rx.check 40/48 83.33%\n"
        "lb.tx 84/138 60.87%\n"
        "lb.tx.status 24/48 50.00%\n");
  CHECK(print_hierarchy(report_hierarchy(u, db.accumulate({"external_rx", "loop_send", "reload_busy"}))) ==
        ". 97/202 48.02%\n"
        "lb 97/202 48.02%\n"
        "lb.loop 9/16 56.25%\n"
        "lb.rx 21/48 43.75%\n"
        "lb.rx.check 21/48 43.75%\n"
        "lb.tx 67/138 48.55%\n"
        "lb.tx.status 18/48 37.50%\n");
}
