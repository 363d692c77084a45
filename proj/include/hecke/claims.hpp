#pragma once

// The acceptance suite: nine exact checks, each reporting what it expected
// and what it computed. Shared by the acceptance test binary and the CLI's
// `verify` command. Deterministic for a given seed.

#include "hecke/cache.hpp"
#include "hecke/symplectic.hpp"

#include <chrono>
#include <functional>

namespace hecke::claims {

struct Options {
  std::uint64_t seed = 20240611;
  unsigned jobs = 1;
  std::shared_ptr<TableStore> store;
  int stability_trials = 1000;
  std::optional<std::int64_t> injected_level; // extra level for the validation check
};

struct Result {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string expected;
  std::string computed;
  double seconds = 0;
};

struct Claim {
  int id;
  std::string name;
  std::function<Result(const Options &)> run;
};

namespace detail {

// Accumulates sub-checks; the claim passes iff all of them pass.
class Report {
public:
  void check(bool ok, const std::string &what) {
    ++total_;
    if (!ok) {
      ++failed_;
      if (failures_.size() < 5)
        failures_.push_back(what);
    }
  }
  bool ok() const { return failed_ == 0; }
  std::string summary(const std::string &tail = "") const {
    std::string s = std::to_string(total_ - failed_) + "/" + std::to_string(total_) + " checks";
    if (!tail.empty())
      s += "; " + tail;
    for (const auto &f : failures_)
      s += "; FAILED " + f;
    return s;
  }

private:
  std::size_t total_ = 0, failed_ = 0;
  std::vector<std::string> failures_;
};

inline HeckeContext context(const Options &o, std::int64_t n) { return HeckeContext(Level(n), 0, o.jobs, o.store); }

inline Int t1_count(const Level &level, const Int &p) {
  return level.divisible_by(p) ? Int(p + 2 * p * p + p * p * p) : Int(1 + p + p * p + p * p * p);
}

inline Int t2_count(const Level &level, const Int &p) {
  const Int p3 = p * p * p;
  return level.divisible_by(p) ? Int(2 * p3 + 2 * p3 * p) : Int(p + p * p + p3 + p3 * p);
}

inline Int binomial(unsigned n, unsigned k) {
  Int r = 1;
  for (unsigned i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

} // namespace detail

inline Result coset_counts(const Options &o) {
  detail::Report rep;
  std::ostringstream got;
  for (auto [n, p] : std::vector<std::pair<std::int64_t, int>>{
           {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 2}, {3, 3}, {5, 2}, {6, 2}}) {
    HeckeContext ctx = detail::context(o, n);
    const Int c1 = ctx.table(label_t1(p)).size(), c2 = ctx.table(label_t2(p)).size();
    const Int e1 = detail::t1_count(ctx.level(), p), e2 = detail::t2_count(ctx.level(), p);
    rep.check(c1 == e1, "T1 N=" + std::to_string(n) + " p=" + std::to_string(p));
    rep.check(c2 == e2, "T2 N=" + std::to_string(n) + " p=" + std::to_string(p));
    got << " (" << n << "," << p << "):" << c1 << "," << c2;
  }
  return {1, "", rep.ok(), "1+p+p^2+p^3 / p+2p^2+p^3 and p+p^2+p^3+p^4 / 2p^3+2p^4",
          rep.summary("(N,p):T1,T2" + got.str())};
}

inline Result census(const Options &o) {
  detail::Report rep;
  for (std::int64_t n : {1, 2, 3, 5, 6})
    for (int p : {2, 3})
      for (unsigned r = 0; r <= 3; ++r)
        rep.check(count_double_cosets(Level(n), p, r) == detail::binomial(r + 2, 2),
                  "N=" + std::to_string(n) + " p=" + std::to_string(p) + " r=" + std::to_string(r));
  // Products of generator cosets must not leave the census.
  for (auto [n, p] : std::vector<std::pair<std::int64_t, int>>{{1, 2}, {2, 2}}) {
    HeckeContext ctx = detail::context(o, n);
    const auto labels = census_labels(ctx.level(), p, 2);
    for (const auto &[x, y] : {std::pair{label_t1(p), label_t2(p)}, std::pair{label_t1(p), label_t1(p)}}) {
      bool inside = true;
      for (const auto &a : ctx.table(x).reps)
        for (const auto &b : ctx.table(y).reps)
          inside = inside && labels.count(double_coset_canonical(a * b));
      rep.check(inside, "products " + x.str() + "*" + y.str() + " at N=" + std::to_string(n));
    }
  }
  return {2, "", rep.ok(), "C(r+2,2) = 1,3,6,10 for r = 0..3", rep.summary("N in {1,2,3,5,6}, p in {2,3}")};
}

inline Result commutativity(const Options &o) {
  detail::Report rep;
  std::ostringstream got;
  for (auto [n, p] : std::vector<std::pair<std::int64_t, int>>{{1, 2}, {2, 2}, {3, 3}}) {
    HeckeContext ctx = detail::context(o, n);
    const HeckeElement t1(label_t1(p)), t2(label_t2(p));
    const HeckeElement ab = multiply(ctx, t1, t2), ba = multiply(ctx, t2, t1);
    rep.check(ab == ba, "N=" + std::to_string(n) + " p=" + std::to_string(p));
    got << " N=" << n << ": " << ab.size() << " terms";
  }
  return {3, "", rep.ok(), "T1(p) T2(p) = T2(p) T1(p)", rep.summary(got.str())};
}

inline Result coprime(const Options &o) {
  detail::Report rep;
  std::size_t instances = 0;
  for (std::int64_t n : {1, 2}) {
    HeckeContext ctx = detail::context(o, n);
    for (const auto &x : {label_t1(2), label_t2(2)})
      for (const auto &y : {label_t1(3), label_t2(3)}) {
        const HeckeElement xy = multiply(ctx, HeckeElement(x), HeckeElement(y));
        const auto expected = double_coset_canonical(x.representative(ctx.level()) * y.representative(ctx.level()));
        rep.check(xy == HeckeElement(expected) && multiply(ctx, HeckeElement(y), HeckeElement(x)) == xy,
                  x.str() + "*" + y.str() + " N=" + std::to_string(n));
        ++instances;
      }
  }
  {
    HeckeContext oc = detail::context(o, 2);
    SigmaHeckeContext ctx(oc);
    const std::vector<std::pair<ParamodCosetLabel, ParamodCosetLabel>> cases{
        {sigma_label_t1(2), sigma_label_t1(3)}, {sigma_label_t2(2), sigma_label_t1(3)},
        {sigma_label_w(2), sigma_label_t2(3)}, {{1, 2, 1, 1}, sigma_label_t1(3)}};
    for (const auto &[x, y] : cases) {
      const auto xy = sigma_multiply(ctx, ParamodHeckeElement(x), ParamodHeckeElement(y));
      const auto expected = sigma_canonical(x.representative(oc.level()) * y.representative(oc.level()));
      rep.check(xy == ParamodHeckeElement(expected) &&
                    sigma_multiply(ctx, ParamodHeckeElement(y), ParamodHeckeElement(x)) == xy,
                x.str() + "*" + y.str() + " Sigma_2");
      ++instances;
    }
  }
  rep.check(instances >= 10, "at least 10 instances");
  return {4, "", rep.ok(), "single double coset, coefficient 1 (>= 10 instances)",
          rep.summary(std::to_string(instances) + " instances")};
}

inline Result generation(const Options &o) {
  detail::Report rep;
  std::ostringstream got;
  for (std::int64_t n : {1, 2}) {
    HeckeContext ctx = detail::context(o, n);
    for (unsigned k = 0; k <= 2; ++k)
      for (const auto &l : labels_of_degree(2, k)) {
        const HeckeElement x(l);
        const auto poly = express_in_generators(ctx, x, 2);
        rep.check(evaluate_polynomial(ctx, poly, 2) == x, l.str() + " N=" + std::to_string(n));
        if (k == 2)
          got << " N=" << n << " " << l.str() << " = " << polynomial_str(poly) << ";";
      }
  }
  return {5, "", rep.ok(), "every label with denominator dividing 4 is an integer polynomial in T1(2), T2(2)",
          rep.summary(got.str())};
}

inline Result isomorphism(const Options &o) {
  detail::Report rep;
  std::mt19937_64 rng(o.seed);
  std::uniform_int_distribution<int> num(-9, 9), den(1, 6);
  int points = 0;
  for (std::int64_t n : {1, 2, 3, 5, 6}) {
    const Level level(n);
    const std::string tag = " N=" + std::to_string(n);
    for (int k = 0; k < 20; ++k, ++points) {
      SympElement m = random_sigma_element(level, rng(), 5, true);
      if (k % 3 == 0)
        m = m * SigmaStarLabel{1 + k % 4, 1 + k % 3}.representative(level);
      GaussMat z(2, 2);
      const Rat y1 = Rat(1) + Rat(std::abs(num(rng)), den(rng)), y3 = Rat(1) + Rat(std::abs(num(rng)), den(rng));
      z(0, 0) = GaussRat(Rat(num(rng), den(rng)), y1);
      z(0, 1) = z(1, 0) = GaussRat(Rat(num(rng), den(rng)), Rat(num(rng), 10 * den(rng)));
      z(1, 1) = GaussRat(Rat(num(rng), den(rng)), y3);
      const auto pz = phi(level, z);
      const auto img = half_space_action(to_orthogonal(m).mat(), level, std::span<const GaussRat>(pz));
      rep.check(img && img->z == phi(level, siegel_action(m, z)), "intertwining" + tag);
    }
    for (int u = 1; u <= 4; ++u)
      for (int v = 1; v <= 4; ++v) {
        const Int uv(u * v);
        const OrthoElement expected = OrthoElement::make(
            build_form(level, 5), IntMat::diagonal({Int(1), Int(v), uv, Int(u * u * v), uv * uv}), uv);
        rep.check(to_orthogonal(SigmaStarLabel{u, v}.representative(level)) == expected,
                  "diagonal u=" + std::to_string(u) + " v=" + std::to_string(v) + tag);
      }
    for (int k = 0; k < 100; ++k) {
      const OrthoElement e = to_orthogonal(random_sigma_element(level, rng(), 8));
      rep.check(e.is_integral() && in_discriminant_kernel(e), "m33 = 1 mod 2N" + tag);
    }
    for (int k = 0; k < 20; ++k) {
      const SympElement a = random_sigma_element(level, rng(), 6, true), b = random_sigma_element(level, rng(), 6, true);
      rep.check(to_orthogonal(a * b) == to_orthogonal(a) * to_orthogonal(b), "homomorphism" + tag);
    }
    rep.check(to_orthogonal(j_n(level)).mat() == gen::j_star(), "J_N -> J*" + tag);
  }
  return {6, "", rep.ok(), "intertwining on 100 points, diagonal images for u,v <= 4, Sigma_N image in discriminant kernel",
          rep.summary(std::to_string(points) + " points, N in {1,2,3,5,6}")};
}

inline Result atkin_lehner(const Options &o) {
  detail::Report rep;
  std::ostringstream got;
  for (std::int64_t n : {2, 3}) {
    HeckeContext oc = detail::context(o, n);
    SigmaHeckeContext ctx(oc);
    const std::string tag = " N=" + std::to_string(n);
    const auto one = ParamodHeckeElement::unit();
    const ParamodHeckeElement w(sigma_label_w(n)), t1(sigma_label_t1(n)), t2(sigma_label_t2(n));
    rep.check(sigma_multiply(ctx, w, w) == one, "W_N^2 = 1" + tag);
    rep.check(sigma_multiply(ctx, w - one, w + one).is_zero(), "(W_N - 1)(W_N + 1) = 0" + tag);
    const auto wt2 = sigma_multiply(ctx, w, t2), t2w = sigma_multiply(ctx, t2, w);
    rep.check(!(wt2 == t2w), "W_p T2 != T2 W_p" + tag);
    rep.check(sigma_multiply(ctx, w, t1) == sigma_multiply(ctx, t1, w), "W_p T1 = T1 W_p" + tag);
    got << tag << ": W T2 = " << wt2.str() << ", T2 W = " << t2w.str() << ";";
  }
  return {7, "", rep.ok(), "W^2 = 1, (W-1)(W+1) = 0, W T2 != T2 W, W T1 = T1 W", rep.summary(got.str())};
}

inline Result stability(const Options &o) {
  detail::Report rep;
  std::mt19937_64 rng(o.seed + 8);
  const int trials = o.stability_trials;
  const std::vector<std::int64_t> levels{1, 2, 3, 5, 6};
  const std::vector<std::vector<Int>> labels3{{1, 2, 4}, {1, 3, 9}, {2, 2, 2}, {1, 6, 36}};
  const std::vector<std::vector<Int>> labels5{{1, 2, 2, 2, 4}, {1, 1, 2, 4, 4}, {1, 3, 9, 27, 81}, {1, 6, 6, 6, 36}};
  const std::vector<ParamodCosetLabel> plabels{{1, 1, 1, 2}, {1, 1, 2, 1}, {1, 2, 1, 1}, {2, 1, 2, 1},
                                               {2, 2, 1, 3}, {1, 1, 3, 2}, {3, 3, 1, 1}, {6, 1, 1, 5}};
  int bad[6] = {0, 0, 0, 0, 0, 0};
  for (int t = 0; t < trials; ++t) {
    const Level level(levels[t % levels.size()]);
    for (int dim : {3, 5}) {
      const QuadForm form = build_form(level, dim);
      const auto &ls = dim == 3 ? labels3 : labels5;
      const OrthoElement x = make_label(ls[t % ls.size()]).representative(level);
      const OrthoElement g = random_group_element(form, rng(), 6), h = random_group_element(form, rng(), 6);
      const OrthoElement y = g * x * h;
      const OrthoElement left = random_group_element(form, rng(), 8) * y;
      if (!(right_coset_canonical(left) == right_coset_canonical(y)))
        ++bad[dim == 3 ? 0 : 1];
      if (!(double_coset_canonical(y) == double_coset_canonical(x)))
        ++bad[dim == 3 ? 2 : 3];
    }
    const SympElement s = SigmaStarLabel{1 + t % 3, 1 + t % 2}.representative(level);
    const SympElement ss = random_sigma_element(level, rng(), 5, true) * s * random_sigma_element(level, rng(), 5, true);
    if (!(sigma_star_canonical(ss) == sigma_star_canonical(s)))
      ++bad[4];
    const Level plevel(std::array<std::int64_t, 3>{2, 3, 6}[t % 3]);
    ParamodCosetLabel pl = plabels[t % plabels.size()];
    if (!pl.is_valid(plevel))
      pl = plabels[t % 2];
    const SympElement r = pl.representative(plevel);
    const SympElement rr = random_sigma_element(plevel, rng(), 6) * r * random_sigma_element(plevel, rng(), 6);
    if (!(sigma_canonical(rr) == pl))
      ++bad[5];
  }
  const char *names[6] = {"right cosets dim 3", "right cosets dim 5", "double cosets dim 3",
                          "double cosets dim 5", "Sigma*_N", "Sigma_N"};
  std::ostringstream got;
  for (int i = 0; i < 6; ++i) {
    rep.check(bad[i] == 0, names[i]);
    got << (i ? ", " : "") << names[i] << " " << trials - bad[i] << "/" << trials;
  }
  return {8, "", rep.ok(), "canonical labels unchanged by random multiplication (" + std::to_string(trials) +
                               " trials per setting)",
          rep.summary(got.str())};
}

inline Result input_validation(const Options &o) {
  detail::Report rep;
  std::vector<std::int64_t> rejected{4, 9, 12, 0, -6};
  if (o.injected_level)
    rejected.push_back(*o.injected_level);
  std::string message;
  for (auto n : rejected) {
    try {
      Level level(n);
      rep.check(is_squarefree(Int(n)) && n > 0, "N=" + std::to_string(n) + " accepted");
    } catch (const LevelError &e) {
      if (n == 4)
        message = e.what();
      rep.check(!(n > 0 && is_squarefree(Int(n))), "N=" + std::to_string(n) + " wrongly rejected");
    }
  }
  rep.check(message.find("(2,1,2)") != std::string::npos, "rejection message cites g = (2,1,2)'");
  // g = (2,1,2)' is primitive and isotropic for S_4: 2 g1 g3 - 2*4 g2^2 = 0.
  const Int g1 = 2, g2 = 1, g3 = 2;
  rep.check(2 * g1 * g3 - 8 * g2 * g2 == 0 && gcd(gcd(g1, g2), g3) == 1, "(2,1,2)' isotropic and primitive for N=4");
  for (std::int64_t n : {1, 2, 3, 5, 6, 30})
    rep.check(Level(n).n() == n, "N=" + std::to_string(n) + " accepted");
  return {9, "", rep.ok(), "N = 4 rejected with the (2,1,2)' rationale; squarefree N accepted",
          rep.summary("message: " + message)};
}

inline std::vector<Claim> acceptance_claims() {
  return {
      {1, "right-coset counts", coset_counts},
      {2, "double-coset census", census},
      {3, "commutativity", commutativity},
      {4, "coprime multiplicativity", coprime},
      {5, "generation", generation},
      {6, "isomorphism", isomorphism},
      {7, "Atkin-Lehner identities", atkin_lehner},
      {8, "canonical-form stability", stability},
      {9, "input validation", input_validation},
  };
}

inline Result run(const Claim &c, const Options &o) {
  const auto t0 = std::chrono::steady_clock::now();
  Result r;
  try {
    r = c.run(o);
  } catch (const std::exception &e) {
    r = {c.id, c.name, false, "", std::string("error: ") + e.what(), 0};
  }
  r.id = c.id;
  r.name = c.name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// Writes a table, corrupts one representative on disk and checks that the
// next load discards it and the recomputed table is unchanged.
inline Result cache_revalidation(const std::filesystem::path &dir) {
  detail::Report rep;
  const Level level(1);
  const auto label = label_t1(2);
  auto store = std::make_shared<FileTableStore>(dir);
  std::filesystem::remove(store->path_for(level, label));
  HeckeContext first(level, 0, 1, store);
  const auto reference = first.table(label).reps;
  rep.check(store->stats().written == 1, "table written");
  const auto path = store->path_for(level, label);
  io::json j;
  {
    std::ifstream in(path);
    j = io::parse_text(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
  }
  j["reps"][0][0][0] = "7";
  {
    std::ofstream out(path);
    out << j.dump();
  }
  HeckeContext second(level, 0, 1, store);
  rep.check(second.table(label).reps == reference, "recomputed table equal");
  rep.check(store->stats().discarded == 1, "tampered entry discarded");
  HeckeContext third(level, 0, 1, store);
  rep.check(third.table(label).reps == reference && store->stats().hits == 1, "rewritten entry reloads");
  return {0, "cache revalidation", rep.ok(), "tampered entry discarded and recomputed",
          rep.summary(store->last_discard()), 0};
}

} // namespace hecke::claims
