#include "lsd/scenario.hpp"
#include "lsd/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

namespace lsd {

using nlohmann::json;

namespace {

// Walks one JSON object; every key must be consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(ErrorKind::ConfigError, "'" + name() + "' must be an object");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    template <class T>
    T get(const std::string& k, T def) {
        seen_.insert(k);
        if (!j_.contains(k)) return def;
        try {
            return j_.at(k).get<T>();
        } catch (const json::exception&) {
            fail(ErrorKind::ConfigError, "key '" + key(k) + "' has the wrong type");
        }
    }

    std::optional<double> number_or_auto(const std::string& k) {
        seen_.insert(k);
        if (!j_.contains(k)) return std::nullopt;
        const json& v = j_.at(k);
        if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
        if (!v.is_number()) fail(ErrorKind::ConfigError, "key '" + key(k) + "' must be a number or \"auto\"");
        return v.get<double>();
    }

    Section sub(const std::string& k) {
        seen_.insert(k);
        static const json empty = json::object();
        return Section(j_.contains(k) ? j_.at(k) : empty, key(k));
    }

    const json& raw(const std::string& k) {
        seen_.insert(k);
        return j_.at(k);
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) fail(ErrorKind::ConfigError, "unknown key '" + key(k) + "'");
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
    std::string name() const { return path_.empty() ? "<root>" : path_; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

DispersionConfig read_dispersion(Section s) {
    DispersionConfig c;
    c.family = s.get("family", c.family);
    c.coefficients = s.get("coefficients", c.coefficients);
    c.exponent = s.get("exponent", c.exponent);
    c.strip_radius = s.get("strip_radius", c.strip_radius);
    c.growth_exponent = s.get("growth_exponent", c.growth_exponent);
    c.growth_constant = s.get("growth_constant", c.growth_constant);
    s.finish();
    static const std::set<std::string> families{"even_polynomial", "relativistic", "quartic", "zero"};
    if (!families.count(c.family)) fail(ErrorKind::ConfigError, "key '" + s.key("family") + "': unknown family " + c.family);
    return c;
}

json dispersion_json(const DispersionConfig& c) {
    return {{"family", c.family},
            {"coefficients", c.coefficients},
            {"exponent", c.exponent},
            {"strip_radius", c.strip_radius},
            {"growth_exponent", c.growth_exponent},
            {"growth_constant", c.growth_constant}};
}

cplx read_complex(const json& v, const std::string& key) {
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    fail(ErrorKind::ConfigError, "key '" + key + "' entries must be [re, im] pairs");
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json("auto"); }

}  // namespace

std::vector<double> SweepConfig::values() const {
    std::vector<double> v;
    if (!present) return v;
    for (int i = 0; i < points; ++i)
        v.push_back(points == 1 ? from : from + (to - from) * double(i) / double(points - 1));
    return v;
}

std::string Scenario::hash() const { return sha256_hex(canonical.dump()); }

void apply_override(json& raw, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        fail(ErrorKind::ConfigError, "override '" + assignment + "' is not key=value");
    const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &raw;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string k = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (k.empty()) fail(ErrorKind::ConfigError, "override key '" + path + "' is malformed");
        if (!node->is_object()) fail(ErrorKind::ConfigError, "override key '" + path + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[k] = value;
            return;
        }
        node = &(*node)[k];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

Scenario parse_scenario(const json& raw) {
    Scenario s;
    Section root(raw, "");
    s.schema_version = root.get("schema_version", 0);
    if (s.schema_version != kSchemaVersion)
        fail(ErrorKind::ConfigError, "key 'schema_version' must be " + std::to_string(kSchemaVersion));
    s.name = root.get("name", s.name);
    {
        Section d = root.sub("dispersion");
        s.first = read_dispersion(d.sub("first"));
        s.second = read_dispersion(d.sub("second"));
        d.finish();
    }
    {
        Section p = root.sub("potential");
        auto& c = s.potential;
        c.family = p.get("family", c.family);
        c.amplitude = p.get("amplitude", c.amplitude);
        c.b = p.get("b", c.b);
        c.odd_amplitude = p.get("odd_amplitude", c.odd_amplitude);
        c.radius = p.get("radius", c.radius);
        c.decay_rate = p.get("decay_rate", c.decay_rate);
        c.a_prime = p.get("a_prime", c.a_prime);
        c.method = p.get("method", c.method);
        c.xi0 = p.get("xi0", c.xi0);
        c.bump_radius = p.get("bump_radius", c.bump_radius);
        c.bump_amplitude = p.get("bump_amplitude", c.bump_amplitude);
        c.spacing = p.get("spacing", c.spacing);
        c.half_width = p.get("half_width", c.half_width);
        c.csv = p.get("csv", c.csv);
        c.manifest = p.get("manifest", c.manifest);
        p.finish();
        static const std::set<std::string> families{"zero", "gaussian", "bump", "embedded", "sampled"};
        if (!families.count(c.family)) fail(ErrorKind::ConfigError, "key 'potential.family': unknown family " + c.family);
        if (c.method != "closed_form" && c.method != "quadrature")
            fail(ErrorKind::ConfigError, "key 'potential.method' must be closed_form or quadrature");
        if (c.family == "sampled" && (c.csv.empty() || c.manifest.empty()))
            fail(ErrorKind::ConfigError, "key 'potential.csv' and 'potential.manifest' are required for sampled V");
    }
    {
        Section g = root.sub("grid");
        s.K = g.get("K", s.K);
        s.N = g.get("N", s.N);
        s.d = g.get("d", s.d);
        g.finish();
        if (!(s.K > 0.0)) fail(ErrorKind::ConfigError, "key 'grid.K' must be positive");
        if (s.N < 3 || s.N % 2 == 0) fail(ErrorKind::ConfigError, "key 'grid.N' must be odd and >= 3");
        if (s.d != 1) fail(ErrorKind::ConfigError, "key 'grid.d': only d = 1 is supported");
    }
    if (root.has("theta")) {
        const json& t = root.raw("theta");
        if (!t.is_array() || t.empty()) fail(ErrorKind::ConfigError, "key 'theta' must be a non-empty list");
        s.theta.clear();
        for (const auto& v : t) s.theta.push_back(read_complex(v, "theta"));
    } else {
        root.get("theta", 0);
    }
    s.xi = root.get("xi", s.xi);
    if (root.has("sweep")) {
        Section w = root.sub("sweep");
        s.sweep.present = true;
        s.sweep.parameter = w.get("parameter", s.sweep.parameter);
        s.sweep.from = w.get("from", 0.0);
        s.sweep.to = w.get("to", 0.0);
        s.sweep.points = w.get("points", 0);
        w.finish();
        if (s.sweep.parameter != "xi" && s.sweep.parameter != "xi0")
            fail(ErrorKind::ConfigError, "key 'sweep.parameter' must be xi or xi0");
        if (s.sweep.points < 1) fail(ErrorKind::ConfigError, "key 'sweep.points' must be positive");
    } else {
        root.get("sweep", 0);
    }
    if (root.has("rectangle")) {
        Section r = root.sub("rectangle");
        s.rectangle.present = true;
        s.rectangle.center = r.number_or_auto("center");
        s.rectangle.half_width = r.number_or_auto("half_width");
        s.rectangle.depth_slope = r.number_or_auto("depth_slope");
        r.finish();
    } else {
        root.get("rectangle", 0);
    }
    {
        Section t = root.sub("tolerances");
        auto& c = s.tol;
        c.eig_tol = t.get("eig_tol", c.eig_tol);
        c.tail_tolerance = t.get("tail_tolerance", c.tail_tolerance);
        c.flow_tol = t.get("flow_tol", c.flow_tol);
        c.match_tol = t.get("match_tol", c.match_tol);
        c.newton_tol = t.get("newton_tol", c.newton_tol);
        c.drift_tol = t.get("drift_tol", c.drift_tol);
        c.residual_tol = t.get("residual_tol", c.residual_tol);
        c.mourre_margin = t.get("mourre_margin", c.mourre_margin);
        c.series_tol = t.get("series_tol", c.series_tol);
        c.band_lipschitz = t.get("band_lipschitz", c.band_lipschitz);
        t.finish();
    }
    {
        Section c = root.sub("certify");
        s.certify.resolution = c.get("resolution", s.certify.resolution);
        s.certify.k_extent = c.get("k_extent", s.certify.k_extent);
        s.certify.sample_count = c.get("sample_count", s.certify.sample_count);
        s.certify.theta_samples = c.get("theta_samples", s.certify.theta_samples);
        s.certify.d_prime = c.get("d_prime", s.certify.d_prime);
        c.finish();
    }
    {
        Section m = root.sub("mourre");
        s.mourre.lambda = m.get("lambda", s.mourre.lambda);
        s.mourre.shell_step = m.get("shell_step", s.mourre.shell_step);
        m.finish();
    }
    {
        Section f = root.sub("feshbach");
        s.feshbach.mu = f.number_or_auto("mu");
        s.feshbach.contour_radius = f.get("contour_radius", s.feshbach.contour_radius);
        s.feshbach.probe_offset = f.get("probe_offset", s.feshbach.probe_offset);
        s.feshbach.nodes = f.get("nodes", s.feshbach.nodes);
        f.finish();
    }
    {
        Section c = root.sub("commlab");
        s.commlab.n = c.get("n", s.commlab.n);
        s.commlab.seeds = c.get("seeds", s.commlab.seeds);
        s.commlab.first_seed = c.get("first_seed", s.commlab.first_seed);
        s.commlab.k_max = c.get("k_max", s.commlab.k_max);
        s.commlab.radius_fraction = c.get("radius_fraction", s.commlab.radius_fraction);
        c.finish();
    }
    s.output = root.get("output", s.output);
    s.seed = root.get("seed", s.seed);
    root.finish();

    json theta = json::array();
    for (cplx t : s.theta) theta.push_back({t.real(), t.imag()});
    const auto& p = s.potential;
    s.canonical = {
        {"schema_version", s.schema_version},
        {"name", s.name},
        {"dispersion", {{"first", dispersion_json(s.first)}, {"second", dispersion_json(s.second)}}},
        {"potential",
         {{"family", p.family}, {"amplitude", p.amplitude}, {"b", p.b}, {"odd_amplitude", p.odd_amplitude},
          {"radius", p.radius}, {"decay_rate", p.decay_rate}, {"a_prime", p.a_prime}, {"method", p.method},
          {"xi0", p.xi0}, {"bump_radius", p.bump_radius}, {"bump_amplitude", p.bump_amplitude},
          {"spacing", p.spacing}, {"half_width", p.half_width}, {"csv", p.csv}, {"manifest", p.manifest}}},
        {"grid", {{"K", s.K}, {"N", s.N}, {"d", s.d}}},
        {"theta", theta},
        {"xi", s.xi},
        {"tolerances",
         {{"eig_tol", s.tol.eig_tol}, {"tail_tolerance", s.tol.tail_tolerance}, {"flow_tol", s.tol.flow_tol},
          {"match_tol", s.tol.match_tol}, {"newton_tol", s.tol.newton_tol}, {"drift_tol", s.tol.drift_tol},
          {"residual_tol", s.tol.residual_tol}, {"mourre_margin", s.tol.mourre_margin},
          {"series_tol", s.tol.series_tol}, {"band_lipschitz", s.tol.band_lipschitz}}},
        {"certify",
         {{"resolution", s.certify.resolution}, {"k_extent", s.certify.k_extent},
          {"sample_count", s.certify.sample_count}, {"theta_samples", s.certify.theta_samples},
          {"d_prime", s.certify.d_prime}}},
        {"mourre", {{"lambda", s.mourre.lambda}, {"shell_step", s.mourre.shell_step}}},
        {"feshbach",
         {{"mu", opt_json(s.feshbach.mu)}, {"contour_radius", s.feshbach.contour_radius},
          {"probe_offset", s.feshbach.probe_offset}, {"nodes", s.feshbach.nodes}}},
        {"commlab",
         {{"n", s.commlab.n}, {"seeds", s.commlab.seeds}, {"first_seed", s.commlab.first_seed},
          {"k_max", s.commlab.k_max}, {"radius_fraction", s.commlab.radius_fraction}}},
        {"output", s.output},
        {"seed", s.seed}};
    if (s.sweep.present)
        s.canonical["sweep"] = {
            {"parameter", s.sweep.parameter}, {"from", s.sweep.from}, {"to", s.sweep.to}, {"points", s.sweep.points}};
    if (s.rectangle.present)
        s.canonical["rectangle"] = {{"center", opt_json(s.rectangle.center)},
                                    {"half_width", opt_json(s.rectangle.half_width)},
                                    {"depth_slope", opt_json(s.rectangle.depth_slope)}};
    return s;
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream f(path);
    if (!f) fail(ErrorKind::ConfigError, "cannot open scenario " + path);
    json raw;
    try {
        raw = json::parse(f);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::ConfigError, path + ": " + e.what());
    }
    for (const auto& o : overrides) apply_override(raw, o);
    Scenario s = parse_scenario(raw);
    // relative data paths are taken relative to the scenario file
    const auto base = std::filesystem::path(path).parent_path();
    for (std::string* p : {&s.potential.csv, &s.potential.manifest})
        if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).string();
    return s;
}

std::string resolve_output_dir(const Scenario& s, const std::string& flag) {
    std::filesystem::path p = !flag.empty() ? flag : (!s.output.empty() ? s.output : s.name);
    if (flag.empty() && p.is_relative()) {
        const char* root = std::getenv("LSD_OUTPUT_ROOT");
        p = std::filesystem::path(root && *root ? root : "runs") / p;
    }
    return p.string();
}

}  // namespace lsd
