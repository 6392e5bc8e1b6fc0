#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hypertest/bitset.hpp"
#include "hypertest/gif.hpp"

namespace hypertest {

struct DbHeader {
  std::string circuit;
  std::string hash;
  std::string mode;
  std::string model;
  std::string tool = kToolVersion;
  std::size_t items = 0;

  friend bool operator==(const DbHeader&, const DbHeader&) = default;
};

struct DbTest {
  std::string name;
  std::uint64_t cycles = 0;
  Bitset covered;

  friend bool operator==(const DbTest&, const DbTest&) = default;
};

/// Tests are kept sorted by name; adding a test under an existing name ORs
/// the coverage and keeps the larger cycle count.
class CoverageDb {
 public:
  CoverageDb() = default;
  explicit CoverageDb(DbHeader h) : header_(std::move(h)) {}
  static CoverageDb for_universe(const GifUniverse& u);

  const DbHeader& header() const { return header_; }
  const std::vector<DbTest>& tests() const { return tests_; }
  const DbTest* find(std::string_view name) const;

  void add(DbTest t);
  void add(const CoverageSet& cs);
  /// OR of the named tests' coverage. Throws std::out_of_range for an unknown name.
  Bitset accumulate(const std::vector<std::string>& names) const;
  Bitset accumulate_all() const;

  friend bool operator==(const CoverageDb&, const CoverageDb&) = default;

 private:
  DbHeader header_;
  std::vector<DbTest> tests_;
};

/// `.gcdb` text. The last line is a SHA-256 checksum of everything before it.
std::string print_db(const CoverageDb& db);
/// Throws DiagnosticError for malformed or altered files. A non-empty
/// `expected_hash` must match the header.
CoverageDb parse_db(std::string_view text, std::string_view expected_hash = {});
void write_db(const CoverageDb& db, const std::string& path);
CoverageDb read_db(const std::string& path, std::string_view expected_hash = {});

/// Union of test lists. Throws std::invalid_argument on header mismatch.
CoverageDb merge(const std::vector<CoverageDb>& dbs);
CoverageDb merge(const CoverageDb& a, const CoverageDb& b);

struct HierNode {
  std::string path;  // dotted loc prefix; empty for the root
  std::string name;
  std::size_t own_total = 0, own_covered = 0;
  std::size_t total = 0, covered = 0;
  std::vector<HierNode> children;

  const HierNode* find(std::string_view p) const;
  friend bool operator==(const HierNode&, const HierNode&) = default;
};

/// Percentage with two decimals, rounded half up; "0.00" for an empty node.
std::string percent(std::size_t covered, std::size_t total);

/// Rollup of items over their loc paths; children sorted by name.
HierNode report_hierarchy(const GifUniverse& u, const Bitset& covered);
/// One line per node, depth first: `<path> <covered>/<total> <percent>%`, the root as `.`.
std::string print_hierarchy(const HierNode& root);

/// True when `item_path` is `path` or lies below it.
bool path_contains(std::string_view path, std::string_view item_path);

struct ApiResponse {
  int status = 200;
  std::string body;
};

/// Read-only query layer behind the HTTP service. Responses are JSON and a
/// pure function of (db, universe, request).
class CoverageApi {
 public:
  CoverageApi(CoverageDb db, GifUniverse u);

  ApiResponse get(std::string_view route, const std::map<std::string, std::string>& query) const;
  const CoverageDb& db() const { return db_; }
  const GifUniverse& universe() const { return u_; }

 private:
  CoverageDb db_;
  GifUniverse u_;
};

/// Tree JSON back to a node, for clients and cross-checks.
HierNode hierarchy_from_json(std::string_view json);

/// HTTP front end for a CoverageApi, plus optional static files.
class ApiServer {
 public:
  explicit ApiServer(const CoverageApi& api, const std::string& static_dir = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); returns false on socket failure.
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hypertest
