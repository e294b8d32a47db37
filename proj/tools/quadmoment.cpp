// quadmoment: verification workbench for moment predictions over quadratic
// fields.  Verbs either evaluate predicted constants, run empirical family
// experiments against them, or re-derive local data from first principles.
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/version.hpp>

#include "CLI11.hpp"
#include "json.hpp"
#include "qm/experiments.hpp"
#include "qm/orbitcount.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using qm::i64;
using nlohmann::json;

struct Options {
  std::string s;
  i64 m = 0;
  std::vector<i64> cutoffs;
  i64 primes = 100000;
  std::string cache;
  std::string out;
  std::string config;
  int threads = 1;
  std::uint64_t mem_cap = 2ull << 30;
  bool override_guard = false;
  bool conjectural = false;
  // verb-specific
  i64 d = 0;
  std::vector<i64> plist;
  std::vector<std::string> classes;
  i64 p = 0;
  int delta = 0;
};

std::string fmt_double12(double v) {
  char buf[48];
  auto res = std::to_chars(buf, buf + sizeof buf, v,
                           std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

std::vector<i64> parse_i64_list(const std::string& text) {
  std::vector<i64> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    i64 v = 0;
    auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
      throw std::invalid_argument("bad integer list entry '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

// Plain key=value config file; '#' starts a comment.  Values fill only
// options the command line left untouched, so the precedence is
// command line > config file > built-in defaults.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r' ||
                             line.back() == '\t'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    auto eq = line.find('=', start);
    if (eq == std::string::npos)
      throw std::invalid_argument("config line is not key=value: " + line);
    kv[line.substr(start, eq - start)] = line.substr(eq + 1);
  }
  return kv;
}

struct Manifest {
  json doc;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  Manifest(const std::string& verb, const Options& o) {
    doc["tool"] = "quadmoment";
    doc["versions"] = {{"quadmoment", kVersion}, {"boost", BOOST_LIB_VERSION}};
    doc["verb"] = verb;
    json in;
    if (!o.s.empty()) in["s"] = o.s;
    if (o.m != 0) in["m"] = o.m;
    if (!o.cutoffs.empty()) in["cutoffs"] = o.cutoffs;
    in["primes"] = o.primes;
    if (!o.cache.empty()) in["cache"] = o.cache;
    in["threads"] = o.threads;
    in["mem_cap_bytes"] = o.mem_cap;
    in["override_guard"] = o.override_guard;
    in["conjectural"] = o.conjectural;
    if (!o.config.empty()) in["config_file"] = o.config;
    doc["inputs"] = std::move(in);
    doc["checks"] = json::array();
  }
  void check(const std::string& name, bool ok) {
    doc["checks"].push_back({{"name", name}, {"ok", ok}});
  }
  // wall-clock timings are the one intentionally nondeterministic field
  void finish(const Options& o, int exit_code) {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    doc["timings_ms"] = {{"total", ms}};
    doc["exit_code"] = exit_code;
    if (o.out.empty()) return;
    std::ofstream f(o.out);
    if (!f) throw std::invalid_argument("cannot write manifest to " + o.out);
    f << doc.dump(2) << '\n';
  }
};

json rows_json(const qm::ExperimentReport& rep) {
  json arr = json::array();
  for (const auto& r : rep.rows)
    arr.push_back({{"X", r.cutoff},
                   {"count", r.field_count},
                   {"empirical", r.empirical.str(30)},
                   {"prediction", r.prediction.str(30)},
                   {"rel_err", r.rel_err.str(6)}});
  return arr;
}

qm::OrbitClass class_from_name(const std::string& name) {
  using qm::OrbitClass;
  for (OrbitClass c : {OrbitClass::ur_sp, OrbitClass::ur_ur,
                       OrbitClass::ur_rm, OrbitClass::rm_ur,
                       OrbitClass::rm_rm})
    if (qm::orbit_class_name(c) == name) return c;
  throw std::invalid_argument("unknown orbit class '" + name +
                              "' (use ur-sp, ur-ur, ur-rm, rm-ur, rm-rm)");
}

std::string rat_str(const qm::Rat& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) s += "/" + denominator(r).str();
  return s;
}

int verb_predict(const std::string& verb, const Options& o) {
  Manifest man(verb, o);
  qm::STuple s = qm::parse_stuple(o.s);
  qm::ProductEstimate est;
  if (verb == "predict-mean") {
    est = qm::predicted_mean(s, o.primes, o.conjectural);
  } else {
    if (o.m == 0) throw std::invalid_argument("predict-cor needs --m");
    est = qm::predicted_correlation(o.m, s, o.primes);
  }
  man.check("hypotheses", true);
  man.doc["result"] = json::parse(est.to_json());
  std::cout << est.to_kv();
  man.finish(o, 0);
  return 0;
}

int verb_run(const std::string& verb, const Options& o) {
  Manifest man(verb, o);
  qm::STuple s = qm::parse_stuple(o.s);
  if (o.cutoffs.empty()) throw std::invalid_argument(verb + " needs --cutoffs");
  qm::HRCache cache;
  qm::RunOptions ro;
  ro.prime_bound = o.primes;
  ro.conjectural = o.conjectural;
  ro.override_guard = o.override_guard;
  if (!o.cache.empty()) {
    cache = qm::HRCache(o.cache);
    ro.cache = &cache;
  }
  qm::ExperimentReport rep;
  if (verb == "run-mean") {
    rep = qm::mean_square_run(s, o.cutoffs, ro);
  } else {
    if (o.m == 0) throw std::invalid_argument(verb + " needs --m");
    rep = verb == "run-cor" ? qm::correlation_run(s, o.m, o.cutoffs, ro)
                            : qm::inner_product_run(s, o.m, o.cutoffs, ro);
  }
  if (!o.cache.empty()) cache.flush();
  man.check("hypotheses", true);
  man.check("guard", true);
  man.doc["result"] = {{"kind", rep.kind},
                       {"stuple", rep.stuple},
                       {"prediction", json::parse(rep.prediction.to_json())},
                       {"rows", rows_json(rep)}};
  if (rep.m != 0) man.doc["result"]["m"] = rep.m;
  std::cout << rep.csv();
  man.finish(o, 0);
  return 0;
}

int verb_verify_local(const Options& o) {
  Manifest man("verify-local", o);
  std::vector<i64> ps = o.plist.empty() ? std::vector<i64>{3, 5} : o.plist;
  std::vector<std::string> cls =
      o.classes.empty()
          ? std::vector<std::string>{"ur-sp", "ur-ur", "rm-ur"}
          : o.classes;
  qm::OrbitOptions oo;
  oo.mem_cap_bytes = o.mem_cap;
  std::cout << "p,n,class,orbit_size,volume_num,volume_den,epsilon_num,"
               "epsilon_den,relation_factor,status\n";
  bool all_ok = true;
  json results = json::array();
  for (i64 p : ps)
    for (const std::string& cname : cls) {
      qm::OrbitReport r = qm::epsilon_from_orbit(p, class_from_name(cname), oo);
      all_ok = all_ok && r.ok;
      std::cout << r.p << ',' << r.n << ',' << cname << ',' << r.orbit_size
                << ',' << numerator(r.volume).str() << ','
                << denominator(r.volume).str() << ','
                << numerator(r.epsilon_expected).str() << ','
                << denominator(r.epsilon_expected).str() << ','
                << rat_str(r.relation_factor) << ','
                << (r.ok ? "ok" : "fail") << '\n';
      man.check(std::to_string(p) + ":" + cname, r.ok);
      results.push_back({{"p", r.p},
                         {"n", r.n},
                         {"class", cname},
                         {"orbit_size", r.orbit_size},
                         {"relation_factor", rat_str(r.relation_factor)},
                         {"ok", r.ok}});
    }
  man.doc["result"] = std::move(results);
  int code = all_ok ? 0 : 1;
  man.finish(o, code);
  return code;
}

int verb_verify_stab(const Options& o) {
  Manifest man("verify-stab", o);
  if (o.p == 0 || o.delta == 0)
    throw std::invalid_argument("verify-stab needs --p and --delta");
  qm::StabParams sp = qm::stab_params(o.p, o.delta);
  i64 count = qm::stabilizer_congruence_count(o.p, sp.n, sp.a1, sp.a2);
  i64 expected = 2;
  for (int i = 0; i < o.delta; ++i) expected *= o.p;
  bool ok = count == expected;
  std::cout << "p=" << o.p << " delta=" << o.delta << " n=" << sp.n
            << " count=" << count << " expected=" << expected
            << " status=" << (ok ? "ok" : "fail") << '\n';
  man.check("stabilizer-count", ok);
  man.doc["result"] = {{"p", o.p},   {"delta", o.delta},
                       {"n", sp.n},  {"count", count},
                       {"expected", expected}};
  int code = ok ? 0 : 1;
  man.finish(o, code);
  return code;
}

int verb_verify_twist(const Options& o) {
  Manifest man("verify-twist", o);
  qm::STuple s = qm::parse_stuple(o.s);
  if (o.m == 0) throw std::invalid_argument("verify-twist needs --m");
  if (o.cutoffs.empty())
    throw std::invalid_argument("verify-twist needs --cutoffs");
  qm::RunOptions ro;
  ro.prime_bound = o.primes;
  ro.override_guard = o.override_guard;
  i64 X = *std::max_element(o.cutoffs.begin(), o.cutoffs.end());
  qm::TwistCheckReport rep = qm::verify_disc_twist(s, o.m, X, ro);
  std::cout << rep.csv();
  std::cerr << "checked " << rep.checked << " discriminants, "
            << rep.failures << " failures\n";
  bool ok = rep.failures == 0;
  man.check("twist-law", ok);
  man.doc["result"] = {{"m", rep.m},
                       {"stuple", rep.stuple},
                       {"checked", rep.checked},
                       {"failures", rep.failures}};
  int code = ok ? 0 : 1;
  man.finish(o, code);
  return code;
}

int verb_hr(const Options& o) {
  Manifest man("hr", o);
  if (o.d == 0) throw std::invalid_argument("hr needs --d");
  qm::HRCache cache;
  qm::HRCache* cp = nullptr;
  if (!o.cache.empty()) {
    cache = qm::HRCache(o.cache);
    cp = &cache;
  }
  qm::FieldRecord rec = qm::hR(o.d, cp);
  if (cp) cache.flush();
  std::cout << "d=" << rec.d << "\nh=" << rec.h
            << "\nR=" << fmt_double12(rec.R) << '\n';
  man.check("hr", true);
  man.doc["result"] = {{"d", rec.d}, {"h", rec.h}, {"R", fmt_double12(rec.R)}};
  man.finish(o, 0);
  return 0;
}

int verb_sieve(const Options& o) {
  Manifest man("sieve", o);
  if (o.cutoffs.empty()) throw std::invalid_argument("sieve needs --cutoffs");
  i64 X = *std::max_element(o.cutoffs.begin(), o.cutoffs.end());
  qm::STuple s;
  if (!o.s.empty()) s = qm::parse_stuple(o.s);
  qm::RunOptions guard_probe;
  guard_probe.override_guard = o.override_guard;
  i64 cap = s.arch == qm::ArchKind::RR ? guard_probe.real_cutoff_guard
                                       : guard_probe.imag_cutoff_guard;
  if (X > cap && !o.override_guard)
    throw std::invalid_argument("cutoff exceeds the enumeration guard");
  qm::HRCache cache;
  qm::HRCache* cp = nullptr;
  if (!o.cache.empty()) {
    cache = qm::HRCache(o.cache);
    cp = &cache;
  }
  std::cout << "d,h,R\n";
  i64 rows = 0;
  if (s.arch == qm::ArchKind::CC) {
    qm::ImagSieve sv = qm::sieve_class_numbers_imag(std::max<i64>(X, 3));
    for (i64 n = 3; n <= X; ++n) {
      if (!sv.fundamental[n] || !qm::matches(-n, s)) continue;
      std::cout << -n << ',' << sv.h[n] << ",1\n";
      if (cp) cp->put(qm::FieldRecord{-n, sv.h[n], 1.0});
      ++rows;
    }
  } else {
    for (i64 d : qm::enumerate_discs(X, s)) {
      qm::FieldRecord rec = qm::hR(d, cp);
      std::cout << rec.d << ',' << rec.h << ',' << fmt_double12(rec.R) << '\n';
      ++rows;
    }
  }
  if (cp) cache.flush();
  man.check("sieve", true);
  man.doc["result"] = {{"rows", rows}};
  man.finish(o, 0);
  return 0;
}

int dispatch(const std::string& verb, const Options& o) {
  if (verb == "predict-mean" || verb == "predict-cor")
    return verb_predict(verb, o);
  if (verb == "run-mean" || verb == "run-cor" || verb == "run-inner")
    return verb_run(verb, o);
  if (verb == "verify-local") return verb_verify_local(o);
  if (verb == "verify-stab") return verb_verify_stab(o);
  if (verb == "verify-twist") return verb_verify_twist(o);
  if (verb == "hr") return verb_hr(o);
  if (verb == "sieve") return verb_sieve(o);
  throw std::invalid_argument("unknown verb " + verb);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadmoment: moment predictions for h*R over quadratic fields"};
  app.require_subcommand(1);

  Options o;
  std::string cutoffs_text, plist_text, classes_text;
  std::vector<CLI::App*> subs;
  for (const char* verb :
       {"predict-mean", "predict-cor", "run-mean", "run-cor", "run-inner",
        "verify-local", "verify-stab", "verify-twist", "hr", "sieve"}) {
    CLI::App* sub = app.add_subcommand(verb, "");
    sub->add_option("--s", o.s, "S-tuple, e.g. \"inf=C;3=rm\"");
    sub->add_option("--m", o.m, "twisting fundamental discriminant");
    sub->add_option("--cutoffs", cutoffs_text, "comma-separated X values");
    sub->add_option("--primes", o.primes, "Euler product prime bound");
    sub->add_option("--cache", o.cache, "h/R cache file path");
    sub->add_option("--out", o.out, "write the JSON run manifest here");
    sub->add_option("--threads", o.threads, "worker count (reserved; >= 1)");
    sub->add_option("--mem-cap", o.mem_cap, "orbit memory cap in bytes");
    sub->add_flag("--override-guard", o.override_guard,
                  "lift the enumeration cutoff guards");
    sub->add_flag("--conjectural", o.conjectural,
                  "allow configs outside the proven range");
    sub->add_option("--config", o.config, "key=value defaults file");
    sub->add_option("--d", o.d, "fundamental discriminant (hr)");
    sub->add_option("--p", plist_text, "prime, or comma list (verify verbs)");
    sub->add_option("--classes", classes_text,
                    "comma list of orbit classes (verify-local)");
    sub->add_option("--delta", o.delta,
                    "ramification exponent (verify-stab)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (!o.config.empty()) {
      for (const auto& [key, value] : read_config(o.config)) {
        if (sub->count("--" + key) > 0) continue;  // command line wins
        if (key == "s") {
          o.s = value;
        } else if (key == "m") {
          o.m = std::stoll(value);
        } else if (key == "cutoffs") {
          cutoffs_text = value;
        } else if (key == "primes") {
          o.primes = std::stoll(value);
        } else if (key == "cache") {
          o.cache = value;
        } else if (key == "out") {
          o.out = value;
        } else if (key == "threads") {
          o.threads = std::stoi(value);
        } else if (key == "mem-cap") {
          o.mem_cap = std::stoull(value);
        } else if (key == "override-guard") {
          o.override_guard = value == "1" || value == "true";
        } else if (key == "conjectural") {
          o.conjectural = value == "1" || value == "true";
        } else if (key == "d") {
          o.d = std::stoll(value);
        } else if (key == "p") {
          plist_text = value;
        } else if (key == "classes") {
          classes_text = value;
        } else if (key == "delta") {
          o.delta = std::stoi(value);
        } else {
          throw std::invalid_argument("unknown config key '" + key + "'");
        }
      }
    }
    // the cache path is the one setting with an environment fallback
    if (o.cache.empty()) {
      if (const char* env = std::getenv("QUADMOMENT_CACHE")) o.cache = env;
    }
    if (o.threads < 1) throw std::invalid_argument("--threads must be >= 1");
    o.cutoffs = parse_i64_list(cutoffs_text);
    o.plist = parse_i64_list(plist_text);
    if (!o.plist.empty()) o.p = o.plist.front();
    o.classes = split_list(classes_text);
    return dispatch(sub->get_name(), o);
  } catch (const qm::ParseError& e) {
    std::cerr << "error: " << e.what() << " (token '" << e.token
              << "' at position " << e.position << ")\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "check failed: " << e.what() << '\n';
    return 1;
  }
}
