#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "newtonspec/verify.hpp"

namespace newtonspec {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_ineq(std::string& out, const char* name, const IneqCheck& ineq) {
  out += "  \"";
  out += name;
  out += "\": {\n    \"lhs\": " + num(ineq.lhs) + ",\n    \"rhs\": " + num(ineq.rhs) +
         ",\n    \"slack_ratio\": " + num(ineq.slack_ratio) + "\n  },\n";
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& values, const char* sep, Fmt fmt) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += fmt(values[i]);
  }
  return out;
}

std::vector<double> parse_semi_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

}  // namespace

std::string report_to_json(const VerificationReport& r) {
  std::string out = "{\n";
  out += "  \"schema\": \"newtonspec-report/1\",\n";
  out += "  \"surface\": \"" + r.surface + "\",\n";
  out += "  \"n\": " + std::to_string(r.n) + ",\n";
  out += "  \"N\": " + std::to_string(r.N) + ",\n";
  out += "  \"c\": " + std::to_string(r.c) + ",\n";
  out += "  \"r\": " + std::to_string(r.r) + ",\n";
  out += "  \"level\": " + std::to_string(r.level) + ",\n";
  out += "  \"mesh\": {\n    \"vertices\": " + std::to_string(r.mesh_vertices) +
         ",\n    \"elements\": " + std::to_string(r.mesh_elements) + "\n  },\n";
  out += "  \"eigenvalues\": [" + join(r.eigenvalues, ", ", num) + "],\n";
  out += "  \"clusters\": [" +
         join(r.clusters, ", ", [](int v) { return std::to_string(v); }) + "],\n";
  append_ineq(out, "thm1", r.thm1);
  append_ineq(out, "thm2", r.thm2);
  append_ineq(out, "cor1", r.cor1);
  append_ineq(out, "cor2", r.cor2);
  out += "  \"identity_residuals\": {\n";
  out += "    \"trace_max_abs\": " + num(r.identity_residuals.trace_max_abs) + ",\n";
  out += "    \"contraction_max_abs\": " + num(r.identity_residuals.contraction_max_abs) + ",\n";
  out += "    \"weak_lr_x\": " + num(r.identity_residuals.weak_lr_x) + "\n  },\n";
  out += "  \"ellipticity_min\": " + num(r.ellipticity_min) + ",\n";
  out += std::string("  \"lemma_check_pass\": ") + (r.lemma_check_pass ? "true" : "false") + ",\n";
  if (r.timings.recorded) {
    out += "  \"timings\": {\n";
    out += "    \"mesh_s\": " + num(r.timings.mesh_s) + ",\n";
    out += "    \"assemble_s\": " + num(r.timings.assemble_s) + ",\n";
    out += "    \"solve_s\": " + num(r.timings.solve_s) + ",\n";
    out += "    \"integrate_s\": " + num(r.timings.integrate_s) + ",\n";
    out += "    \"total_s\": " + num(r.timings.total_s) + "\n  }\n";
  } else {
    out += "  \"timings\": null\n";
  }
  out += "}\n";
  return out;
}

std::string report_to_csv(const VerificationReport& r) {
  std::string out =
      "surface,n,N,c,r,level,vertices,elements,eigenvalues,clusters,"
      "thm1_lhs,thm1_rhs,thm1_slack_ratio,thm2_lhs,thm2_rhs,thm2_slack_ratio,"
      "cor1_lhs,cor1_rhs,cor1_slack_ratio,cor2_lhs,cor2_rhs,cor2_slack_ratio,"
      "trace_max_abs,contraction_max_abs,weak_lr_x,ellipticity_min,lemma_check_pass\n";
  // surface descriptors contain commas (e.g. axis lists), so the field is quoted
  out += "\"" + r.surface + "\"," + std::to_string(r.n) + "," + std::to_string(r.N) + "," +
         std::to_string(r.c) + "," + std::to_string(r.r) + "," + std::to_string(r.level) + "," +
         std::to_string(r.mesh_vertices) + "," + std::to_string(r.mesh_elements) + ",";
  out += join(r.eigenvalues, ";", num) + ",";
  out += join(r.clusters, ";", [](int v) { return std::to_string(v); });
  for (const IneqCheck* ineq : {&r.thm1, &r.thm2, &r.cor1, &r.cor2})
    out += "," + num(ineq->lhs) + "," + num(ineq->rhs) + "," + num(ineq->slack_ratio);
  out += "," + num(r.identity_residuals.trace_max_abs) + "," +
         num(r.identity_residuals.contraction_max_abs) + "," +
         num(r.identity_residuals.weak_lr_x) + "," + num(r.ellipticity_min) + "," +
         (r.lemma_check_pass ? "true" : "false") + "\n";
  return out;
}

void emit_report(const VerificationReport& report, const std::string& path,
                 ReportFormat format) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ReportWriteError("emit_report: cannot open " + path);
  os << (format == ReportFormat::Json ? report_to_json(report) : report_to_csv(report));
  os.flush();
  if (!os.good()) throw ReportWriteError("emit_report: write failed for " + path);
}

VerificationReport parse_report(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ReportWriteError("parse_report: cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("parse_report: ") + e.what());
  }

  VerificationReport r;
  if (j.value("schema", std::string()) != "newtonspec-report/1")
    throw InvalidInput("parse_report: unknown schema in " + path);
  r.surface = j.at("surface").get<std::string>();
  r.n = j.at("n").get<int>();
  r.N = j.at("N").get<int>();
  r.c = j.at("c").get<int>();
  r.r = j.at("r").get<int>();
  r.level = j.at("level").get<int>();
  r.mesh_vertices = j.at("mesh").at("vertices").get<int>();
  r.mesh_elements = j.at("mesh").at("elements").get<int>();
  r.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
  r.clusters = j.at("clusters").get<std::vector<int>>();
  const auto load_ineq = [&](const char* name, IneqCheck& out) {
    const auto& block = j.at(name);
    out.lhs = block.at("lhs").get<double>();
    out.rhs = block.at("rhs").get<double>();
    out.slack_ratio = block.at("slack_ratio").get<double>();
  };
  load_ineq("thm1", r.thm1);
  load_ineq("thm2", r.thm2);
  load_ineq("cor1", r.cor1);
  load_ineq("cor2", r.cor2);
  const auto& ids = j.at("identity_residuals");
  r.identity_residuals.trace_max_abs = ids.at("trace_max_abs").get<double>();
  r.identity_residuals.contraction_max_abs = ids.at("contraction_max_abs").get<double>();
  r.identity_residuals.weak_lr_x = ids.at("weak_lr_x").get<double>();
  r.ellipticity_min = j.at("ellipticity_min").get<double>();
  r.lemma_check_pass = j.at("lemma_check_pass").get<bool>();
  if (j.contains("timings") && !j.at("timings").is_null()) {
    const auto& t = j.at("timings");
    r.timings.recorded = true;
    r.timings.mesh_s = t.at("mesh_s").get<double>();
    r.timings.assemble_s = t.at("assemble_s").get<double>();
    r.timings.solve_s = t.at("solve_s").get<double>();
    r.timings.integrate_s = t.at("integrate_s").get<double>();
    r.timings.total_s = t.at("total_s").get<double>();
  }
  return r;
}

SurfaceSpec parse_surface(const std::string& text) {
  const size_t colon = text.find(':');
  if (colon == std::string::npos || colon + 1 >= text.size())
    throw InvalidInput("parse_surface: expected <name>:<params>, got '" + text + "'");
  const std::string name = text.substr(0, colon);
  std::vector<double> params;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      params.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidInput("parse_surface: bad parameter '" + item + "' in '" + text + "'");
    }
  }
  if (params.empty()) throw InvalidInput("parse_surface: no parameters in '" + text + "'");

  if (name == "sphere") {
    if (params.size() != 1)
      throw InvalidInput("parse_surface: sphere takes one radius");
    return SurfaceSpec::sphere(2, params[0]);
  }
  if (name == "ellipsoid") return SurfaceSpec::ellipsoid(params);
  if (name == "flattorus") {
    if (params.size() != 2)
      throw InvalidInput("parse_surface: flattorus takes two radii");
    return SurfaceSpec::flat_torus(params[0], params[1]);
  }
  if (name == "cliffordtorus") {
    if (params.size() != 2)
      throw InvalidInput("parse_surface: cliffordtorus takes two radii");
    return SurfaceSpec::clifford_torus(params[0], params[1]);
  }
  throw InvalidInput("parse_surface: unknown surface '" + name + "'");
}

}  // namespace newtonspec
