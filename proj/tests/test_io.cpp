#include "hecke/claims.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <unistd.h>

using namespace hecke;
using io::json;

namespace {

json reparse(const json &j) { return io::parse_text(j.dump()); }

std::filesystem::path fresh_dir(const std::string &name) {
  auto dir = std::filesystem::temp_directory_path() / ("hecke-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

} // namespace

TEST(Scalars, IntegersAreDecimalStrings) {
  const Int big("-123456789012345678901234567890");
  EXPECT_EQ(io::int_json(big), json("-123456789012345678901234567890"));
  EXPECT_EQ(io::parse_int(io::int_json(big)), big);
  EXPECT_EQ(io::parse_int(json(42)), Int(42));
  for (const json &bad : {json("1.5"), json("abc"), json(""), json("-"), json(true), json(1.5)})
    EXPECT_THROW(io::parse_int(bad), ParseError) << bad.dump();
}

TEST(Scalars, Rationals) {
  const Rat q(Int(-7), Int(12));
  EXPECT_EQ(io::rat_json(q), json("-7/12"));
  EXPECT_EQ(io::parse_rat(io::rat_json(q)), q);
  EXPECT_EQ(io::parse_rat(json("14/4")), Rat(7, 2));
  EXPECT_THROW(io::parse_rat(json("1/0")), ParseError);
}

TEST(RoundTrip, OrthogonalElements) {
  for (std::int64_t n : {1, 2, 6}) {
    const Level level(n);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const QuadForm s5 = build_form(level, 5);
      const OrthoElement g = random_group_element(s5, seed, 6) * label_t2(2).representative(level) *
                             random_group_element(s5, seed + 100, 6);
      EXPECT_EQ(io::ortho_from_json(reparse(io::to_json(g))), g);
      EXPECT_EQ(io::ortho_label_from_json(reparse(io::to_json(double_coset_canonical(g)))), label_t2(2));
    }
  }
}

TEST(RoundTrip, SymplecticElements) {
  const Level level(6);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SympElement m = random_sigma_element(level, seed, 6, true);
    EXPECT_EQ(io::symp_from_json(reparse(io::to_json(m))), m);
  }
}

TEST(RoundTrip, HeckeElements) {
  HeckeContext ctx(Level(1));
  const HeckeElement x = multiply(ctx, HeckeElement(label_t1(2)), HeckeElement(label_t2(2)));
  EXPECT_EQ(io::hecke_element_from_json(reparse(io::to_json(x, ctx.level()))), x);

  SigmaHeckeContext sigma(ctx);
  const ParamodHeckeElement y(sigma_label_t1(3));
  const auto z = sigma_multiply(sigma, y, y);
  EXPECT_EQ(io::paramod_element_from_json(reparse(io::to_json(z, ctx.level()))), z);
}

TEST(Parsing, RejectsBadInput) {
  json j = io::to_json(label_t1(2).representative(Level(1)));
  json wrong_version = j;
  wrong_version["v"] = 2;
  EXPECT_THROW(io::ortho_from_json(wrong_version), ParseError);

  json not_member = j;
  not_member["mat"][0][0] = "3";
  EXPECT_THROW(io::ortho_from_json(not_member), MembershipError);

  json short_row = j;
  short_row["mat"][1].erase(0);
  EXPECT_THROW(io::ortho_from_json(short_row), ParseError);

  json level4 = j;
  level4["N"] = "4";
  EXPECT_THROW(io::ortho_from_json(level4), LevelError);

  EXPECT_THROW(io::ortho_from_json(j, Level(2)), ParseError);
  EXPECT_THROW(io::parse_text("{\"v\": 1,"), ParseError);
}

TEST(Tables, RevalidationCatchesTampering) {
  const Level level(2);
  HeckeContext ctx(level);
  const auto label = label_t1(2);
  const json good = reparse(io::to_json(ctx.table(label), level));
  EXPECT_EQ(io::table_from_json(good, level, label).reps, ctx.table(label).reps);

  json edited = good;
  edited["reps"][0][0][0] = "7";
  EXPECT_ANY_THROW(io::table_from_json(edited, level, label));

  json duplicated = good;
  duplicated["reps"][1] = duplicated["reps"][0];
  EXPECT_THROW(io::table_from_json(duplicated, level, label), InvariantError);

  json dropped = good;
  dropped["reps"].erase(0);
  EXPECT_THROW(io::table_from_json(dropped, level, label), InvariantError);
  dropped["count"] = dropped["reps"].size();
  EXPECT_THROW(io::table_from_json(dropped, level, label), InvariantError);

  EXPECT_THROW(io::table_from_json(good, Level(1), label), InvariantError);
  EXPECT_THROW(io::table_from_json(good, level, label_t2(2)), InvariantError);
}

TEST(Cache, WriteHitAndDiscard) {
  const auto dir = fresh_dir("cache");
  const Level level(2);
  const auto label = label_t2(2);
  auto store = std::make_shared<FileTableStore>(dir);
  std::vector<OrthoElement> reference;
  {
    HeckeContext ctx(level, 0, 1, store);
    reference = ctx.table(label).reps;
  }
  EXPECT_EQ(store->stats().written, 1u);
  EXPECT_TRUE(std::filesystem::exists(store->path_for(level, label)));
  {
    HeckeContext ctx(level, 0, 1, store);
    EXPECT_EQ(ctx.table(label).reps, reference);
  }
  EXPECT_EQ(store->stats().hits, 1u);

  std::ofstream(store->path_for(level, label)) << "{ not json";
  {
    HeckeContext ctx(level, 0, 1, store);
    EXPECT_EQ(ctx.table(label).reps, reference);
  }
  EXPECT_EQ(store->stats().discarded, 1u);
  EXPECT_EQ(store->stats().written, 2u);
  EXPECT_NE(store->last_discard().find("invalid JSON"), std::string::npos);

  EXPECT_TRUE(claims::cache_revalidation(dir / "selftest").passed);
  std::filesystem::remove_all(dir);
}

TEST(Cache, KeysSeparateLevelsAndLabels) {
  FileTableStore store(fresh_dir("keys"));
  const auto a = store.path_for(Level(1), label_t1(2));
  EXPECT_NE(a, store.path_for(Level(2), label_t1(2)));
  EXPECT_NE(a, store.path_for(Level(1), label_t2(2)));
  EXPECT_EQ(a, store.path_for(Level(1), label_t1(2)));
  std::filesystem::remove_all(store.dir());
}
