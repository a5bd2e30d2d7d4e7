#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "ickem/history.hpp"
#include "ickem/ingest.hpp"
#include "ickem/io.hpp"
#include "support.hpp"

using namespace ickem;
using namespace ickem::history;
using ickem::testing::epoch;

namespace {

ingest::LearningSession session(DocId did, std::int64_t start_min, std::int64_t minutes) {
  ingest::LearningSession s;
  s.did = std::move(did);
  s.start = epoch() + Seconds{start_min * 60};
  s.stop = s.start + Seconds{minutes * 60};
  s.duration = s.stop - s.start;
  s.pages = {{1, s.duration}};
  return s;
}

// Writes half of each buffer and then fails, once armed.
class TornLog : public AppendLog {
 public:
  bool armed = false;
  std::string read_all() const override { return bytes_; }
  std::uint64_t size() const override { return bytes_.size(); }
  void append(std::string_view b) override {
    if (armed) {
      bytes_.append(b.substr(0, b.size() / 2));
      throw IoError("disk full");
    }
    bytes_.append(b);
  }
  void truncate(std::uint64_t n) override { bytes_.resize(n); }

 private:
  std::string bytes_;
};

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("ickem-test-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("record_session appends one experience per KP with a positive share") {
  auto store = HistoryStore::in_memory();
  const auto s = session("d", 0, 60);
  CHECK(store.record_session(s, {{"A", 0.6}, {"B", 0.4}}) == 2);
  const auto a = store.load_history("A");
  REQUIRE(a.experiences.size() == 1);
  CHECK(a.experiences[0].duration == Seconds{3600});
  CHECK(a.experiences[0].proportion == 0.6);
  CHECK(a.experiences[0].lct == s.stop);
  CHECK(a.experiences[0].session_id == s.id());
  CHECK(store.load_history("B").experiences[0].proportion == 0.4);
  CHECK(store.load_history("missing").experiences.empty());
}

TEST_CASE("empty share vector appends nothing") {
  auto store = HistoryStore::in_memory();
  CHECK(store.record_session(session("d", 0, 10), {}) == 0);
  CHECK(store.record_count() == 0);
}

TEST_CASE("re-recording a session is rejected") {
  auto store = HistoryStore::in_memory();
  const auto s = session("d", 0, 10);
  store.record_session(s, {{"A", 1.0}});
  CHECK_THROWS_AS(store.record_session(s, {{"A", 1.0}}), DuplicateSession);
  CHECK(store.record_count() == 1);
}

TEST_CASE("factors outside [0, 1] are rejected") {
  auto store = HistoryStore::in_memory();
  CHECK_THROWS_AS(store.record_session(session("d", 0, 10), {{"A", 1.0}}, 1.5), ValidationError);
  CHECK(store.record_count() == 0);
}

TEST_CASE("a failed write leaves nothing behind") {
  auto log = std::make_unique<TornLog>();
  TornLog* raw = log.get();
  HistoryStore store(std::move(log));
  store.record_session(session("d", 0, 10), {{"A", 0.5}, {"B", 0.5}});
  const std::string before = store.dump();

  raw->armed = true;
  CHECK_THROWS_AS(store.record_session(session("d", 100, 10), {{"A", 0.3}, {"C", 0.7}}), IoError);
  CHECK(store.dump() == before);
  CHECK(store.load_history("A").experiences.size() == 1);
  CHECK(store.load_history("C").experiences.empty());
  CHECK_FALSE(store.has_session(session("d", 100, 10).id()));

  raw->armed = false;
  CHECK(store.record_session(session("d", 100, 10), {{"A", 0.3}, {"C", 0.7}}) == 2);
}

TEST_CASE("corrupt records are reported with their byte offset") {
  const auto s = session("d", 0, 10);
  auto good = HistoryStore::in_memory();
  good.record_session(s, {{"A", 1.0}});
  const std::string line = good.dump();

  SECTION("garbage line") {
    try {
      HistoryStore bad(memory_log(line + "{not json\n"));
      FAIL("accepted a corrupt log");
    } catch (const CorruptRecord& e) {
      CHECK(e.offset() == line.size());
    }
  }
  SECTION("torn final record") {
    CHECK_THROWS_AS(HistoryStore(memory_log(line + line.substr(0, 10))), CorruptRecord);
  }
  SECTION("invalid field value") {
    std::string bad = line;
    bad.replace(bad.find("\"proportion\":1.0"), 16, "\"proportion\":2.0");
    CHECK_THROWS_AS(HistoryStore(memory_log(bad)), CorruptRecord);
  }
}

TEST_CASE("interleaved appends keep histories isolated and ordered") {
  auto store = HistoryStore::in_memory();
  std::map<KpId, std::vector<double>> expected;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng);
    const KpId other = (i % 2 == 0) ? "B" : "C";
    store.record_session(session("d" + std::to_string(i % 3), i * 100, 5 + i % 7), {{"A", a}, {other, 1.0 - a}});
    expected["A"].push_back(a);
    expected[other].push_back(1.0 - a);
  }
  for (const auto& [kp, shares] : expected) {
    const auto h = store.load_history(kp);
    REQUIRE(h.experiences.size() == shares.size());
    for (std::size_t i = 0; i < shares.size(); ++i) {
      CHECK(h.experiences[i].proportion == shares[i]);
      if (i > 0) CHECK(h.experiences[i - 1].lct <= h.experiences[i].lct);
    }
  }
  CHECK(store.kps() == std::vector<KpId>{"A", "B", "C"});
}

TEST_CASE("file store survives reopen byte for byte") {
  TempDir dir;
  const auto path = dir.path / "profile.jsonl";
  std::string bytes;
  {
    auto store = HistoryStore::open(path);
    store.record_session(session("d", 0, 30), {{"A", 0.25}, {"B", 0.75}}, 0.8, 0.9, LearningMethod::Discuss);
    store.record_session(session("e", 600, 45), {{"A", 1.0}});
    bytes = store.dump();
  }
  auto reopened = HistoryStore::open(path);
  CHECK(reopened.dump() == bytes);
  CHECK(io::read_file(path) == bytes);
  const auto a = reopened.load_history("A");
  REQUIRE(a.experiences.size() == 2);
  const auto b = reopened.load_history("B");
  CHECK(b.experiences[0].pps_factor == 0.8);
  CHECK(b.experiences[0].lm_factor == 0.9);
  CHECK(b.experiences[0].method == LearningMethod::Discuss);
  CHECK(reopened.has_session(session("e", 600, 45).id()));
}

TEST_CASE("experience validation") {
  auto e = ickem::testing::experience(epoch(), 10, 0.5);
  CHECK_NOTHROW(e.validate());
  e.proportion = 0.0;
  CHECK_THROWS_AS(e.validate(), ValidationError);
  e.proportion = 0.5;
  e.duration = Seconds{0};
  CHECK_THROWS_AS(e.validate(), ValidationError);
}

TEST_CASE("method names") {
  for (auto m : {LearningMethod::Read, LearningMethod::Listen, LearningMethod::Discuss, LearningMethod::Write}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK_FALSE(parse_method("sing"));
}
