#include "overdet/io.hpp"

#include <json.hpp>

#include <fstream>

namespace overdet {

using nlohmann::json;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {
json modes_to_json(const std::map<int, double>& modes) {
    json arr = json::array();
    for (const auto& [k, c] : modes) arr.push_back(json::array({k, c}));
    return arr;
}
void modes_from_json(const json& arr, int m, int family, BoundaryFunction& v) {
    for (const auto& e : arr) v.set_mode(family, e.at(0).get<int>(), e.at(1).get<double>());
    (void)m;
}
}  // namespace

DomainFileV1 make_domain_file(const FixedPointResult& r, int lmax, int K0) {
    DomainFileV1 df;
    df.m = r.md.config.m;
    df.dimension = 2;
    df.lmax = lmax;
    df.K0 = K0;
    df.tau0 = r.md.tau0;
    df.tau2 = r.md.tau2;
    df.zeta = r.md.zeta;
    df.phi0p = r.md.phi0_prime_p0;
    df.f_const = r.f_const;
    df.v = r.v;
    df.grad_variation = r.report.grad_variation;
    df.positivity_min = r.report.positivity_min;
    df.trace_sup = r.report.trace_sup;
    df.n_norm = r.report.n_norm;
    df.iterations = r.report.iterations;
    df.converged = r.report.converged;
    return df;
}

void save_domain_file(const DomainFileV1& df, const std::string& path) {
    json j;
    j["schema_version"] = df.schema_version;
    j["m"] = df.m;
    j["dimension"] = df.dimension;
    j["lmax"] = df.lmax;
    j["k0"] = df.K0;
    j["tau0"] = df.tau0;
    j["tau2"] = df.tau2;
    j["zeta"] = df.zeta;
    j["phi0_prime_p0"] = df.phi0p;
    j["f_const"] = df.f_const;
    j["v"] = {{"a0_family0", df.v.a0[0]},
              {"a0_family2", df.v.a0[1]},
              {"modes_family0", modes_to_json(df.v.modes[0])},
              {"modes_family2", modes_to_json(df.v.modes[1])}};
    j["verification"] = {{"grad_variation", df.grad_variation},
                         {"positivity_min", df.positivity_min},
                         {"trace_sup", df.trace_sup},
                         {"n_norm", df.n_norm},
                         {"iterations", df.iterations},
                         {"converged", df.converged}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_domain_file: cannot open " + path);
    out << j.dump(2) << "\n";
}

DomainFileV1 load_domain_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_domain_file: cannot open " + path);
    json j;
    in >> j;
    DomainFileV1 df;
    if (!j.contains("schema_version"))
        throw std::runtime_error("load_domain_file: missing schema version");
    df.schema_version = j.at("schema_version").get<int>();
    if (df.schema_version != 1)
        throw std::runtime_error("load_domain_file: unsupported schema version " +
                                 std::to_string(df.schema_version));
    df.m = j.at("m").get<int>();
    df.dimension = j.at("dimension").get<int>();
    df.lmax = j.at("lmax").get<int>();
    df.K0 = j.at("k0").get<int>();
    df.tau0 = j.at("tau0").get<double>();
    df.tau2 = j.at("tau2").get<double>();
    df.zeta = j.at("zeta").get<double>();
    df.phi0p = j.at("phi0_prime_p0").get<double>();
    df.f_const = j.at("f_const").get<double>();
    df.v.m = df.m;
    df.v.tau0 = df.tau0;
    df.v.tau2 = df.tau2;
    const json& vv = j.at("v");
    df.v.a0[0] = vv.at("a0_family0").get<double>();
    df.v.a0[1] = vv.at("a0_family2").get<double>();
    modes_from_json(vv.at("modes_family0"), df.m, 0, df.v);
    modes_from_json(vv.at("modes_family2"), df.m, 1, df.v);
    const json& ver = j.at("verification");
    df.grad_variation = ver.at("grad_variation").get<double>();
    df.positivity_min = ver.at("positivity_min").get<double>();
    df.trace_sup = ver.at("trace_sup").get<double>();
    df.n_norm = ver.at("n_norm").get<double>();
    df.iterations = ver.at("iterations").get<int>();
    df.converged = ver.at("converged").get<bool>();
    return df;
}

}  // namespace overdet
