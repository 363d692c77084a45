// hecke: canonical forms, right-coset tables, Hecke products, the
// verification suite and the symplectic <-> orthogonal map.
//
// Exit codes: 0 ok, 1 internal error, 2 parse / invalid input,
// 3 membership, 4 bound, 5 verification failure, 6 level not squarefree.

#include "hecke/cache.hpp"
#include "hecke/claims.hpp"
#include "hecke/json_io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <regex>

using namespace hecke;
using io::json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kParse = 2, kMembership = 3, kBound = 4, kVerify = 5, kLevel = 6 };

struct Config {
  std::int64_t level = 1;
  std::int64_t prime = 2;
  std::string bound;
  std::string cache_dir;
  std::string format = "json";
  std::uint64_t seed = 20240611;
  unsigned jobs = 1;
};

class VerificationFailure : public Error {
public:
  using Error::Error;
};

std::string read_input(const std::string &arg) {
  if (!arg.empty() && (arg[0] == '{' || arg[0] == '['))
    return arg;
  if (arg == "-" || arg.empty())
    return std::string((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
  std::ifstream in(arg);
  if (!in)
    throw ParseError("cannot read " + arg);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::vector<Int> parse_tuple(const std::string &s) {
  std::vector<Int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(io::parse_int(json(item)));
  return out;
}

OrthoDoubleCosetLabel user_label(const std::vector<Int> &invariants) {
  try {
    return make_label(invariants);
  } catch (const InvariantError &e) {
    throw ParseError(e.what());
  }
}

class App {
public:
  explicit App(Config cfg) : cfg_(std::move(cfg)), level_(cfg_.level) {
    if (!cfg_.cache_dir.empty())
      store_ = std::make_shared<FileTableStore>(cfg_.cache_dir);
    Int bound = 0;
    if (!cfg_.bound.empty()) {
      bound = io::parse_int(json(cfg_.bound));
      if (bound < 1)
        throw ParseError("--bound must be >= 1");
    }
    orth_ = std::make_unique<HeckeContext>(level_, bound, cfg_.jobs, store_);
    sigma_ = std::make_unique<SigmaHeckeContext>(*orth_);
  }

  bool text() const { return cfg_.format == "text"; }

  void emit(const json &j, const std::string &plain) const {
    if (text())
      std::cout << plain << '\n';
    else
      std::cout << j.dump(2) << '\n';
  }

  // ---- canon
  void canon(const std::string &group, const std::string &input) {
    const json in = io::parse_text(read_input(input));
    json out{{"v", io::kFormatVersion}, {"N", io::int_json(level_.value())}, {"group", group}};
    std::ostringstream plain;
    if (group == "so3" || group == "so5") {
      const OrthoElement e = io::ortho_from_json(in, level_);
      if ((group == "so3") != (e.dim() == 3))
        throw ParseError("--group " + group + " does not match dim " + std::to_string(e.dim()));
      const auto label = double_coset_canonical(e);
      const auto red = reduce_right_coset(e);
      out["label"] = io::to_json(label);
      out["right_coset"] = io::to_json(red.canonical);
      out["canonical"] = io::to_json(label.representative(level_));
      plain << "double coset " << label.str() << "\nright coset representative " << red.canonical.mat().str()
            << " / " << red.canonical.denom();
    } else if (group == "param" || group == "param-star") {
      const SympElement m = io::symp_from_json(in, level_);
      if (group == "param") {
        const auto label = sigma_canonical(m);
        out["label"] = io::to_json(label);
        out["canonical"] = io::to_json(label.representative(level_));
        plain << "Sigma_N double coset " << label.str() << " (nu = " << label.nu() << ")";
      } else {
        const auto label = sigma_star_canonical(m);
        out["label"] = io::to_json(label);
        out["canonical"] = io::to_json(label.representative(level_));
        plain << "Sigma*_N double coset " << label.str();
      }
    } else {
      throw ParseError("unknown group " + group + " (so3|so5|param|param-star)");
    }
    emit(out, plain.str());
  }

  // ---- cosets
  OrthoDoubleCosetLabel generator_label(const std::string &which) const {
    if (which == "T1")
      return label_t1(cfg_.prime);
    if (which == "T2")
      return label_t2(cfg_.prime);
    if (which.find(',') != std::string::npos)
      return user_label(parse_tuple(which));
    throw ParseError("--which must be T1, T2 or a comma separated label");
  }

  void cosets(const std::string &which, bool with_reps) {
    if (!is_prime(Int(cfg_.prime)))
      throw ParseError("--prime must be prime");
    const auto label = generator_label(which);
    const auto &table = orth_->table(label);
    json out{{"v", io::kFormatVersion}, {"N", io::int_json(level_.value())}, {"label", io::to_json(label)},
             {"count", table.size()}};
    auto *fs = dynamic_cast<FileTableStore *>(store_.get());
    if (fs)
      out["cache"] = fs->path_for(level_, label).string();
    if (with_reps)
      out["reps"] = io::to_json(table, level_)["reps"];
    std::ostringstream plain;
    plain << label.str() << ": " << table.size() << " right cosets";
    if (fs)
      plain << " (cache " << fs->path_for(level_, label).string() << ")";
    emit(out, plain.str());
  }

  // ---- mul
  HeckeElement orth_operand(const std::string &s) {
    static const std::regex gen(R"((T1|T2)\((\d+)\))");
    std::smatch m;
    if (s == "1")
      return HeckeElement::unit();
    if (std::regex_match(s, m, gen)) {
      const Int p(m[2].str());
      if (!is_prime(p))
        throw ParseError("not a prime in " + s);
      return HeckeElement(m[1] == "T1" ? label_t1(p) : label_t2(p));
    }
    if (!s.empty() && s[0] == '@') {
      const json j = io::parse_text(read_input(s.substr(1)));
      if (j.contains("terms"))
        return io::hecke_element_from_json(j);
      return HeckeElement(double_coset_canonical(io::ortho_from_json(j, level_)));
    }
    const auto t = parse_tuple(s);
    if (t.size() != 5)
      throw ParseError("so5 label needs 5 invariants: " + s);
    return HeckeElement(user_label(t));
  }

  ParamodHeckeElement param_operand(const std::string &s) {
    static const std::regex gen(R"((T1|T2|W)\((\d+)\))");
    std::smatch m;
    if (s == "1")
      return ParamodHeckeElement::unit();
    if (std::regex_match(s, m, gen)) {
      const Int k(m[2].str());
      if (m[1] == "W") {
        if (!level_.divisible_by(k))
          throw ParseError("W(d) needs d | N: " + s);
        return ParamodHeckeElement(sigma_label_w(k));
      }
      if (!is_prime(k))
        throw ParseError("not a prime in " + s);
      return ParamodHeckeElement(m[1] == "T1" ? sigma_label_t1(k) : sigma_label_t2(k));
    }
    if (!s.empty() && s[0] == '@') {
      const json j = io::parse_text(read_input(s.substr(1)));
      if (j.contains("terms"))
        return io::paramod_element_from_json(j);
      return ParamodHeckeElement(sigma_canonical(io::symp_from_json(j, level_)));
    }
    const auto t = parse_tuple(s);
    if (t.size() != 4)
      throw ParseError("param label needs d,u1,u2,v: " + s);
    const ParamodCosetLabel l{t[0], t[1], t[2], t[3]};
    if (!l.is_valid(level_))
      throw ParseError("invalid paramodular label " + l.str());
    return ParamodHeckeElement(l);
  }

  void mul(const std::string &group, const std::vector<std::string> &operands) {
    if (operands.empty())
      throw ParseError("mul needs at least one operand");
    if (group == "so5") {
      HeckeElement x = orth_operand(operands[0]);
      for (std::size_t i = 1; i < operands.size(); ++i)
        x = multiply(*orth_, x, orth_operand(operands[i]));
      emit(io::to_json(x, level_), x.str());
    } else if (group == "param") {
      ParamodHeckeElement x = param_operand(operands[0]);
      for (std::size_t i = 1; i < operands.size(); ++i)
        x = sigma_multiply(*sigma_, x, param_operand(operands[i]));
      emit(io::to_json(x, level_), x.str());
    } else {
      throw ParseError("unknown group " + group + " (so5|param)");
    }
  }

  // ---- map
  void map(const std::string &direction, const std::string &input) {
    const json in = io::parse_text(read_input(input));
    if (direction == "sp2so") {
      const OrthoElement e = to_orthogonal(io::symp_from_json(in, level_));
      emit(io::to_json(e), e.mat().str() + " / " + e.denom().str());
    } else if (direction == "so2sp") {
      const SympElement m = to_symplectic(io::ortho_from_json(in, level_));
      emit(io::to_json(m), "(1/sqrt(" + m.scale().str() + ")) " + m.mat().str());
    } else {
      throw ParseError("unknown direction " + direction + " (sp2so|so2sp)");
    }
  }

  // ---- verify
  void verify(int trials, std::optional<std::int64_t> inject) {
    claims::Options opts;
    opts.seed = cfg_.seed;
    opts.jobs = cfg_.jobs;
    opts.store = store_;
    opts.stability_trials = trials;
    opts.injected_level = inject;
    std::vector<claims::Result> results;
    for (const auto &c : claims::acceptance_claims()) {
      results.push_back(claims::run(c, opts));
      if (text())
        print_row(results.back());
    }
    if (auto *fs = dynamic_cast<FileTableStore *>(store_.get())) {
      results.push_back(claims::cache_revalidation(fs->dir() / "selftest"));
      if (text())
        print_row(results.back());
      const auto st = fs->stats();
      if (st.discarded > 0 && text())
        std::cout << "cache: " << st.discarded << " invalid entries discarded and recomputed (" << fs->last_discard()
                  << ")\n";
    }
    const claims::Result *first_failure = nullptr;
    json rows = json::array();
    for (const auto &r : results) {
      rows.push_back({{"id", r.id}, {"claim", r.name}, {"passed", r.passed}, {"expected", r.expected},
                      {"computed", r.computed}, {"seconds", r.seconds}});
      if (!r.passed && !first_failure)
        first_failure = &r;
    }
    if (!text()) {
      json out{{"v", io::kFormatVersion}, {"seed", std::to_string(cfg_.seed)}, {"claims", rows},
               {"passed", first_failure == nullptr}};
      if (auto *fs = dynamic_cast<FileTableStore *>(store_.get()))
        out["cache_discarded"] = fs->stats().discarded;
      std::cout << out.dump(2) << '\n';
    }
    if (first_failure)
      throw VerificationFailure("claim " + std::to_string(first_failure->id) + " (" + first_failure->name +
                                ") failed: " + first_failure->computed);
  }

private:
  static void print_row(const claims::Result &r) {
    std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.id << "  " << r.name << "  (" << std::fixed
              << std::setprecision(1) << r.seconds << "s)\n      expected: " << r.expected
              << "\n      computed: " << r.computed << '\n';
  }

  Config cfg_;
  Level level_;
  std::shared_ptr<TableStore> store_;
  std::unique_ptr<HeckeContext> orth_;
  std::unique_ptr<SigmaHeckeContext> sigma_;
};

int report(int code, const std::string &what) {
  std::cerr << "hecke: " << what << '\n';
  return code;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App cli{"Hecke algebras for orthogonal and paramodular groups of squarefree level"};
  cli.require_subcommand(1);
  cli.fallthrough();
  Config cfg;
  cli.add_option("-N,--level", cfg.level, "level N (squarefree)")->capture_default_str();
  cli.add_option("-p,--prime", cfg.prime, "prime for T1/T2")->capture_default_str();
  cli.add_option("--bound", cfg.bound, "largest admissible denominator m (default: p^2 for p <= 3, p for p >= 5)");
  cli.add_option("--cache-dir", cfg.cache_dir, "right-coset table cache")->envname("HECKE_CACHE_DIR");
  cli.add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  cli.add_option("--seed", cfg.seed, "seed for randomized checks")->capture_default_str();
  auto *jobs = cli.add_option("--jobs", cfg.jobs, "worker threads (env HECKE_JOBS)")->check(CLI::Range(1u, 1024u));

  std::string group = "so5", input = "-", which = "T1", direction;
  bool with_reps = false;
  std::vector<std::string> operands;
  int trials = 1000;
  std::optional<std::int64_t> inject;

  auto *canon = cli.add_subcommand("canon", "canonical double coset (and right coset) of an element");
  canon->add_option("--group", group, "so3|so5|param|param-star")->capture_default_str();
  canon->add_option("input", input, "element JSON: file, '-' for stdin, or inline");

  auto *cosets = cli.add_subcommand("cosets", "right-coset table of T1(p), T2(p) or a label");
  cosets->add_option("--which", which, "T1|T2|a,b,c,d,e")->capture_default_str();
  cosets->add_flag("--reps", with_reps, "include the representatives");

  auto *mul = cli.add_subcommand("mul", "product of Hecke operators, left to right");
  mul->add_option("--group", group, "so5|param")->capture_default_str();
  mul->add_option("operands", operands, "T1(p) T2(p) W(d) 1, label tuples, or @file.json")->required();

  auto *verify = cli.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--trials", trials, "random trials per stability setting")->capture_default_str();
  verify->add_option("--inject-level", inject, "additionally check that this level is handled (e.g. 4)");

  auto *map = cli.add_subcommand("map", "apply M -> M~ (sp2so) or its inverse on canonical forms (so2sp)");
  map->add_option("direction", direction, "sp2so|so2sp")->required()->check(CLI::IsMember({"sp2so", "so2sp"}));
  map->add_option("input", input, "element JSON: file, '-' for stdin, or inline");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = cli.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  try {
    if (const char *env = std::getenv("HECKE_JOBS"); env && jobs->count() == 0) {
      const Int n = io::parse_int(json(env));
      if (n < 1 || n > 1024)
        throw ParseError("HECKE_JOBS must be in [1, 1024]");
      cfg.jobs = static_cast<unsigned>(n);
    }
    App app(cfg);
    if (*canon)
      app.canon(group, input);
    else if (*cosets)
      app.cosets(which, with_reps);
    else if (*mul)
      app.mul(group, operands);
    else if (*verify)
      app.verify(trials, inject);
    else if (*map)
      app.map(direction, input);
  } catch (const LevelError &e) {
    return report(kLevel, e.what());
  } catch (const ParseError &e) {
    return report(kParse, e.what());
  } catch (const ArithmeticError &e) {
    return report(kParse, e.what());
  } catch (const MembershipError &e) {
    return report(kMembership, e.what());
  } catch (const BoundError &e) {
    return report(kBound, e.what());
  } catch (const VerificationFailure &e) {
    return report(kVerify, e.what());
  } catch (const std::exception &e) {
    return report(kInternal, e.what());
  }
  return kOk;
}
