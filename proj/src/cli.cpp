#include "ep3/cli.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "ep3/epfind.hpp"
#include "ep3/jordan.hpp"
#include "ep3/models.hpp"
#include "ep3/parallel.hpp"
#include "ep3/puiseux.hpp"
#include "ep3/serialize.hpp"
#include "ep3/tracking.hpp"

namespace ep3 {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last)
    throw CLI::ValidationError("'" + text + "' is not a number");
  return value;
}

}  // namespace

Complex parse_complex_token(const std::string& token) {
  const auto parts = split(token, ':');
  if (parts.size() == 1) return {parse_double(parts[0]), 0.0};
  if (parts.size() == 2) return {parse_double(parts[0]), parse_double(parts[1])};
  throw CLI::ValidationError("'" + token + "' is not 're' or 're:im'");
}

Complex parse_complex_pair(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw CLI::ValidationError("'" + text + "' is not 're,im'");
  return {parse_double(parts[0]), parse_double(parts[1])};
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(parse_double(p));
  return out;
}

namespace {

struct EPSite {
  FamilyDef def;
  ComplexMatrix h;
  EPRecord record;
};

ComplexMatrix family_matrix(const FamilyDef& def, Complex center) {
  if (def.parameter_count() == 2) {
    const Complex ab[2] = {center.real(), center.imag()};
    return evaluate(def, std::span<const Complex>(ab, 2));
  }
  return evaluate(def, center);
}

/// Highest-order EP of the family matrix at the configured center.
EPSite locate_ep(const RunConfig& config) {
  EPSite site;
  site.def = resolve_family(config.family);
  site.h = family_matrix(site.def, config.center);
  const auto records = detect_ep(site.h);
  const EPRecord* best = nullptr;
  for (const auto& r : records)
    if (r.is_exceptional() && (!best || r.algebraic_multiplicity > best->algebraic_multiplicity))
      best = &r;
  if (!best)
    throw Error(ErrorCode::InvalidInput,
                "family " + site.def.name + " has no exceptional point at the given center");
  if (best->algebraic_multiplicity > 3)
    throw Error(ErrorCode::InvalidInput, "EPs of order > 3 are not supported");
  site.record = *best;
  return site;
}

ComplexMatrix perturbation(const FamilyDef& def, Complex center) {
  if (def.parameter_count() != 1)
    throw Error(ErrorCode::DimensionMismatch, def.name + " is not a one-parameter family");
  return derivative_at(def, center);
}

Json header(const RunConfig& config) {
  Json j;
  j["command"] = config.subcommand;
  j["family"] = config.family;
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  f << content;
  if (!f) throw Error(ErrorCode::InvalidInput, "write failed: " + path);
}

void emit(const RunConfig& config, std::ostream& out, const Json* json, const std::string* csv) {
  if (config.out_prefix) {
    if (json) write_file(*config.out_prefix + ".json", json->dump(2) + "\n");
    if (csv) write_file(*config.out_prefix + ".csv", *csv);
    return;
  }
  if (json) out << json->dump(2) << "\n";
  else if (csv) out << *csv;
}

void cmd_classify(const RunConfig& config, std::ostream& out) {
  const EPSite site = locate_ep(config);
  const LinearFamily family = make_linear_family(site.h, perturbation(site.def, config.center));
  const JordanChain chain = jordan_chain_at(site.h, site.record);
  const double tol = config.tol.value_or(kVanishingTolerance);
  const PuiseuxClass cls = site.record.algebraic_multiplicity == 3 ? classify_ep3(family, chain, tol)
                                                                   : classify_ep2(family, chain, tol);
  Json j = header(config);
  j["center"] = complex_json(config.center);
  j["algebraic_multiplicity"] = site.record.algebraic_multiplicity;
  j["geometric_multiplicity"] = site.record.geometric_multiplicity;
  j["class"] = to_json(cls);
  j["chain"] = to_json(chain);
  emit(config, out, &j, nullptr);
}

void cmd_jordan(const RunConfig& config, std::ostream& out) {
  const EPSite site = locate_ep(config);
  const JordanChain chain = jordan_chain_at(site.h, site.record);
  Json j = header(config);
  j["center"] = complex_json(config.center);
  j["algebraic_multiplicity"] = site.record.algebraic_multiplicity;
  j["geometric_multiplicity"] = site.record.geometric_multiplicity;
  j["chain"] = to_json(chain);
  emit(config, out, &j, nullptr);
}

struct GridPoint {
  Complex z;
  std::vector<Complex> values;
  std::vector<bool> defect;
};

void cmd_sheet(const RunConfig& config, std::ostream& out) {
  const FamilyDef def = resolve_family(config.family);
  if (def.parameter_count() != 1)
    throw Error(ErrorCode::DimensionMismatch, "sheet needs a one-parameter family");
  const auto nx = static_cast<std::size_t>(config.grid[0]);
  const auto ny = static_cast<std::size_t>(config.grid[1]);
  const auto [xmin, xmax, ymin, ymax] = config.bounds;
  // Endpoint-exact interpolation: a grid line through 0 lands on 0.
  const auto coord = [](double lo, double hi, std::size_t i, std::size_t n) {
    return (lo * static_cast<double>(n - 1 - i) + hi * static_cast<double>(i)) / static_cast<double>(n - 1);
  };

  std::vector<GridPoint> points(nx * ny);
  parallel_for(points.size(), [&](std::size_t k) {
    GridPoint& p = points[k];
    p.z = {coord(xmin, xmax, k % nx, nx), coord(ymin, ymax, k / nx, ny)};
    const Spectrum s = eig(evaluate(def, p.z));
    p.values = s.values;
    for (std::size_t i = 0; i < s.values.size(); ++i) p.defect.push_back(s.clusters[s.cluster_of[i]].defective);
  });

  // Row-major continuation: each point follows its left neighbour, the first
  // point of a row follows the first point of the row below.
  std::vector<std::vector<std::size_t>> order(points.size());
  std::vector<std::vector<Complex>> labeled(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (k == 0) {
      order[k].resize(points[k].values.size());
      for (std::size_t i = 0; i < order[k].size(); ++i) order[k][i] = i;
    } else {
      const std::size_t ref = (k % nx == 0) ? k - nx : k - 1;
      order[k] = match_branches(labeled[ref], points[k].values);
    }
    for (std::size_t i : order[k]) labeled[k].push_back(points[k].values[i]);
  }

  std::ostringstream csv;
  csv << "re_z,im_z,branch,re_lambda,im_lambda,defect\n";
  for (std::size_t k = 0; k < points.size(); ++k)
    for (std::size_t b = 0; b < order[k].size(); ++b) {
      const Complex v = labeled[k][b];
      csv << format_double(points[k].z.real()) << ',' << format_double(points[k].z.imag()) << ','
          << b << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << ','
          << (points[k].defect[order[k][b]] ? 1 : 0) << '\n';
    }
  const std::string text = csv.str();
  emit(config, out, nullptr, &text);
}

void cmd_loop(const RunConfig& config, std::ostream& out) {
  const FamilyDef def = resolve_family(config.family);
  LoopSpec spec;
  spec.family = as_parameter_family(def);
  if (def.parameter_count() == 1) spec.path = ComplexCircle{config.center, config.radius};
  else spec.path = RealEllipse{config.radius};
  spec.steps_per_cycle = config.steps;
  spec.cycles = config.cycles;
  const LoopReport report = track_loop(spec);

  Json j = header(config);
  if (def.parameter_count() == 1) {
    j["path"] = "complex-circle";
    j["center"] = complex_json(config.center);
  } else {
    j["path"] = "real-ellipse";
  }
  j["radius"] = config.radius;
  const Json body = to_json(report);
  for (const auto& [key, value] : body.items()) j[key] = value;
  std::ostringstream csv;
  write_loop_csv(csv, report);
  const std::string text = csv.str();
  emit(config, out, &j, &text);
}

void cmd_fit(const RunConfig& config, std::ostream& out) {
  const EPSite site = locate_ep(config);
  const LinearFamily family = make_linear_family(site.h, perturbation(site.def, config.center));
  const ExponentFit fit = fit_exponents(family, site.record.lambda0, config.radii, config.fit_steps);
  Json j = header(config);
  j["center"] = complex_json(config.center);
  j["lambda0"] = complex_json(site.record.lambda0);
  j["steps"] = config.fit_steps;
  const Json body = to_json(fit);
  for (const auto& [key, value] : body.items()) j[key] = value;
  emit(config, out, &j, nullptr);
}

void cmd_find_ep(const RunConfig& config, std::ostream& out) {
  const FamilyDef def = resolve_family(config.family);
  const std::size_t p = def.parameter_count();
  EPSearchProblem problem;
  problem.family = as_parameter_family(def);
  problem.order = config.order.value_or(p >= 2 ? 3 : 2);
  problem.lambda_guess = config.lambda_guess;
  if (!config.guess.empty()) {
    problem.params_guess = config.guess;
  } else {
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> offset(-0.2, 0.2);
    for (std::size_t i = 0; i < p; ++i) problem.params_guess.emplace_back(offset(rng), 0.0);
  }
  EPSearchOptions options;
  if (config.tol) options.tol = *config.tol;
  const EPSearchResult result = find_ep(problem, options);
  Json j = header(config);
  j["order"] = problem.order;
  Json guess = Json::array();
  for (const Complex g : problem.params_guess) guess.push_back(complex_json(g));
  j["guess"] = std::move(guess);
  const Json body = to_json(result);
  for (const auto& [key, value] : body.items()) j[key] = value;
  emit(config, out, &j, nullptr);
}

void validate(const RunConfig& c) {
  const auto fail = [](const std::string& msg) { throw CLI::ValidationError(msg); };
  if (!(c.radius > 0.0) || !std::isfinite(c.radius)) fail("--radius must be positive");
  const int steps = c.subcommand == "fit" ? c.fit_steps : c.steps;
  if (steps < 64 || steps % 2 != 0) fail("--steps must be even and >= 64");
  if (c.cycles < 1) fail("--cycles must be >= 1");
  if (c.grid[0] < 2 || c.grid[1] < 2) fail("--grid needs at least 2 points per axis");
  if (!(c.bounds[0] < c.bounds[1]) || !(c.bounds[2] < c.bounds[3]))
    fail("--bounds must be xmin,xmax,ymin,ymax with xmin < xmax and ymin < ymax");
  if (c.radii.empty()) fail("--radii must not be empty");
  for (std::size_t i = 0; i < c.radii.size(); ++i) {
    if (!(c.radii[i] >= 1e-8)) fail("--radii entries must be >= 1e-8");
    if (i > 0 && !(c.radii[i] < c.radii[i - 1])) fail("--radii must be strictly descending");
  }
  if (c.tol && !(*c.tol > 0.0)) fail("--tol must be positive");
  if (c.order && *c.order != 2 && *c.order != 3) fail("--order must be 2 or 3");
}

}  // namespace

int run_config(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.subcommand == "classify") cmd_classify(config, out);
    else if (config.subcommand == "jordan") cmd_jordan(config, out);
    else if (config.subcommand == "sheet") cmd_sheet(config, out);
    else if (config.subcommand == "loop") cmd_loop(config, out);
    else if (config.subcommand == "fit") cmd_fit(config, out);
    else if (config.subcommand == "find-ep") cmd_find_ep(config, out);
    else {
      err << "unknown subcommand '" << config.subcommand << "'\n";
      return kExitUsage;
    }
  } catch (const Error& e) {
    out << error_json(e).dump(2) << "\n";
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::EPOnPath ? kExitEPOnPath : kExitComputation;
  } catch (const std::exception& e) {
    Json j;
    j["error"] = "Internal";
    j["message"] = e.what();
    out << j.dump(2) << "\n";
    err << "error: " << e.what() << "\n";
    return kExitComputation;
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exceptional-point analysis for complex symmetric matrix families", "ep3-atlas"};
  app.require_subcommand(1, 1);
  app.footer(
      "Families: waveguide-ab-equal, waveguide-ab-opposite, waveguide-2param, ep2-symmetric, "
      "file:<path>.\nExit codes: 0 success, 1 usage error, 2 computation error, 3 loop hits an EP.\n"
      "EP3_ATLAS_THREADS caps the worker threads used by sheet and fit.");

  RunConfig config;
  std::string center, grid, bounds, radii, guess, lambda;
  std::string out_prefix;

  const auto add_family = [&](CLI::App* sub) {
    sub->add_option("--family", config.family, "built-in family name or file:<path>")
        ->capture_default_str();
  };
  const auto add_center = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("--center", center, what);
  };
  const auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", out_prefix, "write <prefix>.json / <prefix>.csv instead of stdout");
  };

  auto* classify = app.add_subcommand("classify", "classify the Puiseux scenario at the family's EP");
  add_family(classify);
  add_center(classify, "EP location as re,im (two-parameter families: a,b)");
  classify->add_option("--tol", config.tol, "relative vanishing threshold (default 1e-8)");
  add_out(classify);

  auto* jordan = app.add_subcommand("jordan", "normalized Jordan chain at the family's EP");
  add_family(jordan);
  add_center(jordan, "EP location as re,im (two-parameter families: a,b)");
  add_out(jordan);

  auto* sheet = app.add_subcommand("sheet", "eigenvalue sheets over a complex parameter grid (CSV)");
  add_family(sheet);
  sheet->add_option("--grid", grid, "nx,ny (default 41,41)");
  sheet->add_option("--bounds", bounds, "xmin,xmax,ymin,ymax (default -0.2,0.2,-0.2,0.2)");
  add_out(sheet);

  auto* loop = app.add_subcommand("loop", "track eigenpairs around a closed loop");
  add_family(loop);
  add_center(loop, "circle center as re,im (two-parameter loops are centered at a = b = 0)");
  loop->add_option("--radius", config.radius, "loop radius")->capture_default_str();
  loop->add_option("--steps", config.steps, "steps per cycle (even, >= 64)")->capture_default_str();
  loop->add_option("--cycles", config.cycles, "number of cycles")->capture_default_str();
  add_out(loop);

  auto* fit = app.add_subcommand("fit", "fit Puiseux exponents from circles of decreasing radius");
  add_family(fit);
  add_center(fit, "EP location as re,im (two-parameter families: a,b)");
  fit->add_option("--radii", radii, "descending radii (default 1e-3,1e-4,1e-5,1e-6)");
  fit->add_option("--steps", config.fit_steps, "phases per circle (even, >= 64)")->capture_default_str();
  add_out(fit);

  auto* find = app.add_subcommand("find-ep", "locate an EP by Newton iteration");
  add_family(find);
  find->add_option("--guess", guess, "parameter guess, comma separated, each 're' or 're:im'");
  find->add_option("--lambda", lambda, "eigenvalue guess 're' or 're:im'");
  find->add_option("--order", config.order, "EP order 2 or 3 (default: 3 if >= 2 parameters)");
  find->add_option("--tol", config.tol, "target ||F|| relative to (1+||H||)^n (default 1e-12)");
  find->add_option("--seed", config.seed, "seed for the random guess used when --guess is absent")
      ->capture_default_str();
  add_out(find);

  try {
    app.parse(argc, argv);
    config.subcommand = app.get_subcommands().front()->get_name();
    if (!center.empty()) config.center = parse_complex_pair(center);
    if (!grid.empty()) {
      const auto g = parse_double_list(grid);
      if (g.size() != 2 || g[0] != std::floor(g[0]) || g[1] != std::floor(g[1]))
        throw CLI::ValidationError("--grid must be nx,ny integers");
      config.grid = {static_cast<int>(g[0]), static_cast<int>(g[1])};
    }
    if (!bounds.empty()) {
      const auto b = parse_double_list(bounds);
      if (b.size() != 4) throw CLI::ValidationError("--bounds needs four numbers");
      config.bounds = {b[0], b[1], b[2], b[3]};
    }
    if (!radii.empty()) config.radii = parse_double_list(radii);
    if (!guess.empty())
      for (const auto& token : split(guess, ',')) config.guess.push_back(parse_complex_token(token));
    if (!lambda.empty()) config.lambda_guess = parse_complex_token(lambda);
    if (!out_prefix.empty()) config.out_prefix = out_prefix;
    validate(config);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  return run_config(config, out, err);
}

}  // namespace ep3
