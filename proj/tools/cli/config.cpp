#include "cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace anisolab::cli {

using nlohmann::json;

std::string format_diagnostic(const Diagnostic& d) {
    std::ostringstream out;
    if (d.line > 0) out << "line " << d.line << ": ";
    if (!d.field.empty()) out << d.field << ": ";
    out << d.message;
    return out.str();
}

namespace {

constexpr std::pair<Experiment, std::string_view> experiment_names[] = {
    {Experiment::exit_time, "exit-time"},       {Experiment::jump_exit, "jump-exit"},
    {Experiment::targeted_jump, "targeted-jump"}, {Experiment::tube, "tube"},
    {Experiment::hit, "hit"},                   {Experiment::harmonic, "harmonic"},
    {Experiment::holder, "holder"},             {Experiment::oscillation, "oscillation"},
    {Experiment::levy_system, "levy-system"},   {Experiment::dynkin, "dynkin"},
    {Experiment::driver_selftest, "driver-selftest"},
};

} // namespace

std::string_view experiment_name(Experiment e) {
    for (const auto& [value, name] : experiment_names)
        if (value == e) return name;
    return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view name) {
    for (const auto& [value, n] : experiment_names)
        if (n == name) return value;
    return std::nullopt;
}

bool is_scaling_experiment(Experiment e) {
    return e == Experiment::exit_time || e == Experiment::jump_exit || e == Experiment::oscillation;
}

std::shared_ptr<const CoefficientField> make_field(const CoefficientPreset& preset, Eigen::Index d) {
    if (preset.name == "identity") return identity_field(d);
    if (preset.name == "constant") return std::make_shared<ConstantField>(preset.matrix);
    if (preset.name == "diagonal") return diagonal_field(preset.diagonal);
    if (preset.name == "rotation")
        return std::make_shared<RotationField>(d, preset.theta0, preset.amplitude, preset.frequency,
                                               preset.scales.size() ? preset.scales : Vec::Ones(d));
    throw ConfigError("unknown coefficient preset '" + preset.name + "'");
}

Payoff make_payoff(const PayoffSpec& spec) {
    const auto axis = static_cast<Eigen::Index>(spec.axis - 1);
    if (spec.type == "halfspace")
        return [axis, c = spec.threshold](const Vec& y) { return y[axis] > c ? 1.0 : 0.0; };
    if (spec.type == "constant") return [v = spec.value](const Vec&) { return v; };
    if (spec.type == "clamped-linear")
        return [axis, s = spec.slope, l = spec.clamp](const Vec& y) { return std::clamp(s * y[axis], -l, l); };
    if (spec.type == "cosine")
        return [axis, xi = spec.frequency, o = spec.origin](const Vec& y) {
            return std::cos(xi * (y[axis] - (o.size() ? o[axis] : 0.0)));
        };
    throw ConfigError("unknown payoff type '" + spec.type + "'");
}

EnsembleSpec ExperimentConfig::ensemble(unsigned threads) const {
    EnsembleSpec spec;
    spec.indices = *indices;
    spec.field = make_field(coefficients, static_cast<Eigen::Index>(indices->dimension()));
    spec.n_paths = sampling.n_paths;
    spec.seed = seed;
    spec.threads = threads;
    spec.max_censored_fraction = sampling.max_censored_fraction;
    if (sampling.jump_threshold || sampling.grid_step || sampling.horizon) {
        // Partially given settings are completed per box by the estimators' defaults, so
        // only a fully specified triple overrides them.
        if (sampling.jump_threshold && sampling.grid_step && sampling.horizon)
            spec.simulation = SimulationConfig{*sampling.jump_threshold, *sampling.grid_step, *sampling.horizon};
    }
    return spec;
}

namespace {

int line_of(const YAML::Node& node) {
    if (!node.IsDefined()) return 0;
    const auto mark = node.Mark();
    return mark.line >= 0 ? mark.line + 1 : 0;
}

json number_json(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? ".inf" : "-.inf";
}

json vec_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_json(v[i]));
    return out;
}

/// A mapping in the config file. Reads record their resolved value in `out`; finish()
/// reports keys that were never read.
class Section {
public:
    Section(YAML::Node node, std::string path, int fallback_line, std::vector<Diagnostic>& diags, json& out)
        : node_(std::move(node)), path_(std::move(path)), line_(fallback_line), diags_(&diags), out_(&out) {
        if (line_of(node_) > 0) line_ = line_of(node_);
        if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap()) {
            error("", "expected a mapping of keys to values");
            node_.reset(YAML::Node());
        }
        if (!out_->is_object()) *out_ = json::object();
    }

    [[nodiscard]] YAML::Node get(const std::string& key) const { return node_[key]; }

    [[nodiscard]] bool has(const std::string& key) const {
        return node_.IsMap() && get(key).IsDefined() && !get(key).IsNull();
    }

    [[nodiscard]] std::string field(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    [[nodiscard]] int line(const std::string& key) const {
        if (has(key)) return line_of(get(key));
        return line_;
    }

    void error(const std::string& key, const std::string& message) {
        diags_->push_back({key.empty() ? line_ : line(key), key.empty() ? path_ : field(key), message});
    }

    void missing(const std::string& key) { error(key, "required field is missing"); }

    template <class T>
    std::optional<T> required(const std::string& key) {
        known_.insert(key);
        if (!has(key)) {
            missing(key);
            return std::nullopt;
        }
        return read<T>(key);
    }

    template <class T>
    T value_or(const std::string& key, T fallback) {
        known_.insert(key);
        if (!has(key)) {
            store(key, fallback);
            return fallback;
        }
        auto v = read<T>(key);
        return v ? *v : fallback;
    }

    template <class T>
    std::optional<T> optional(const std::string& key) {
        known_.insert(key);
        if (!has(key)) {
            (*out_)[key] = nullptr;
            return std::nullopt;
        }
        return read<T>(key);
    }

    /// Reads a list of numbers; a single number counts as a one-element list.
    std::optional<std::vector<double>> number_list(const std::string& key, bool is_required) {
        known_.insert(key);
        if (!has(key)) {
            if (is_required) missing(key);
            else (*out_)[key] = nullptr;
            return std::nullopt;
        }
        if (get(key).IsScalar()) {
            auto v = read<double>(key);
            if (!v) return std::nullopt;
            (*out_)[key] = json::array({number_json(*v)});
            return std::vector<double>{*v};
        }
        return read<std::vector<double>>(key);
    }

    Section section(const std::string& key, bool is_required) {
        known_.insert(key);
        if (is_required && !has(key)) missing(key);
        return Section(has(key) ? get(key) : YAML::Node(), field(key), line(key), *diags_, (*out_)[key]);
    }

    /// A list of mappings; sections are returned in order.
    std::vector<Section> section_list(const std::string& key, bool is_required) {
        known_.insert(key);
        std::vector<Section> out;
        if (!has(key)) {
            if (is_required) missing(key);
            return out;
        }
        const YAML::Node list = get(key);
        if (!list.IsSequence()) {
            error(key, "expected a list");
            return out;
        }
        json& arr = (*out_)[key];
        arr = json::array();
        for (std::size_t i = 0; i < list.size(); ++i) arr.push_back(json::object());
        for (std::size_t i = 0; i < list.size(); ++i)
            out.emplace_back(list[i], field(key) + "[" + std::to_string(i + 1) + "]", line(key), *diags_, arr[i]);
        return out;
    }

    void finish() {
        if (!node_.IsMap()) return;
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const auto key = it->first.as<std::string>();
            if (!known_.count(key))
                diags_->push_back({line_of(it->first), field(key), "unknown key"});
        }
    }

    [[nodiscard]] json& out() { return *out_; }

private:
    template <class T>
    std::optional<T> read(const std::string& key) {
        const YAML::Node n = get(key);
        try {
            T value = convert<T>(n, key);
            store(key, value);
            return value;
        } catch (const YAML::Exception&) {
            error(key, std::string("expected ") + type_name<T>());
        } catch (const std::invalid_argument& e) {
            error(key, e.what());
        }
        return std::nullopt;
    }

    template <class T>
    static const char* type_name() {
        if constexpr (std::is_same_v<T, double>) return "a number";
        else if constexpr (std::is_integral_v<T>) return "a nonnegative integer";
        else if constexpr (std::is_same_v<T, std::string>) return "a string";
        else if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, Vec>) return "a list of numbers";
        else if constexpr (std::is_same_v<T, std::vector<Vec>>) return "a list of points";
        else return "a matrix (list of rows)";
    }

    static double to_double(const YAML::Node& n) {
        if (!n.IsScalar()) throw YAML::BadConversion(n.Mark());
        return n.as<double>();
    }

    template <class T>
    static T convert(const YAML::Node& n, const std::string&) {
        if constexpr (std::is_same_v<T, double>) {
            return to_double(n);
        } else if constexpr (std::is_integral_v<T>) {
            if (!n.IsScalar()) throw YAML::BadConversion(n.Mark());
            try {
                return n.as<T>();
            } catch (const YAML::Exception&) {
                const double v = n.as<double>();
                if (!(v >= 0.0 && v == std::floor(v) && v < 9.007199254740992e15))
                    throw std::invalid_argument("expected a nonnegative integer");
                return static_cast<T>(v);
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!n.IsScalar()) throw YAML::BadConversion(n.Mark());
            return n.as<std::string>();
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (!n.IsSequence()) throw YAML::BadConversion(n.Mark());
            std::vector<double> out;
            for (const auto& item : n) out.push_back(to_double(item));
            return out;
        } else if constexpr (std::is_same_v<T, Vec>) {
            const auto values = convert<std::vector<double>>(n, "");
            return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
        } else if constexpr (std::is_same_v<T, std::vector<Vec>>) {
            if (!n.IsSequence()) throw YAML::BadConversion(n.Mark());
            std::vector<Vec> out;
            for (const auto& item : n) out.push_back(convert<Vec>(item, ""));
            return out;
        } else {
            static_assert(std::is_same_v<T, Mat>);
            const auto rows = convert<std::vector<Vec>>(n, "");
            if (rows.empty()) throw std::invalid_argument("matrix must have at least one row");
            Mat m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].size() != m.cols()) throw std::invalid_argument("matrix rows differ in length");
                m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
            }
            return m;
        }
    }

    template <class T>
    void store(const std::string& key, const T& value) {
        json& slot = (*out_)[key];
        if constexpr (std::is_same_v<T, double>) {
            slot = number_json(value);
        } else if constexpr (std::is_same_v<T, Vec>) {
            slot = vec_json(value);
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            slot = json::array();
            for (double v : value) slot.push_back(number_json(v));
        } else if constexpr (std::is_same_v<T, std::vector<Vec>>) {
            slot = json::array();
            for (const auto& v : value) slot.push_back(vec_json(v));
        } else if constexpr (std::is_same_v<T, Mat>) {
            slot = json::array();
            for (Eigen::Index i = 0; i < value.rows(); ++i) slot.push_back(vec_json(value.row(i).transpose()));
        } else {
            slot = value;
        }
    }

    YAML::Node node_;
    std::string path_;
    int line_;
    std::vector<Diagnostic>* diags_;
    json* out_;
    std::set<std::string> known_;
};

/// Parses one experiment's block. `indices` is empty when the index list itself is invalid;
/// checks that need it are then skipped.
class ParamParser {
public:
    ParamParser(Section& section, const std::optional<StableIndexSet>& indices)
        : s_(section), indices_(indices), d_(indices ? static_cast<Eigen::Index>(indices->dimension()) : 0) {}

    std::optional<Vec> point(const std::string& key, bool is_required = true) {
        auto v = is_required ? s_.required<Vec>(key) : s_.optional<Vec>(key);
        if (v && d_ > 0 && v->size() != d_) {
            s_.error(key, "expected " + std::to_string(d_) + " coordinates, got " + std::to_string(v->size()));
            return std::nullopt;
        }
        return v;
    }

    std::optional<double> scale_r(const std::string& key, std::optional<double> fallback = std::nullopt) {
        auto r = fallback ? std::optional<double>(s_.value_or<double>(key, *fallback)) : s_.required<double>(key);
        if (r && !(*r > 0.0 && *r <= 1.0)) {
            s_.error(key, key + " = " + num(*r) + " must lie in (0,1]");
            return std::nullopt;
        }
        return r;
    }

    std::optional<double> positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
        auto v = fallback ? std::optional<double>(s_.value_or<double>(key, *fallback)) : s_.required<double>(key);
        if (v && !(*v > 0.0)) {
            s_.error(key, key + " must be positive");
            return std::nullopt;
        }
        return v;
    }

    std::optional<BoxSpec> box(const std::string& key, std::optional<Vec> default_center = std::nullopt) {
        Section b = s_.section(key, true);
        ParamParser p(b, indices_);
        BoxSpec spec;
        std::optional<Vec> center = default_center ? std::optional<Vec>(b.value_or<Vec>("center", *default_center))
                                                   : p.point("center");
        auto r = p.scale_r("r", 1.0);
        auto k = p.positive("k", 1.0);
        b.finish();
        if (!center || !r || !k || (d_ > 0 && center->size() != d_)) return std::nullopt;
        spec.center = *center;
        spec.r = *r;
        spec.k = *k;
        return spec;
    }

    std::optional<std::vector<AxisBox>> axis_boxes(const std::string& key) {
        auto sections = s_.section_list(key, true);
        std::vector<AxisBox> boxes;
        bool ok = !sections.empty();
        if (s_.has(key) && sections.empty()) s_.error(key, "at least one box is required");
        for (auto& b : sections) {
            ParamParser p(b, indices_);
            auto lo = p.point("lo");
            auto hi = p.point("hi");
            b.finish();
            if (!lo || !hi) {
                ok = false;
                continue;
            }
            if (lo->size() != hi->size() || ((*hi - *lo).array() < 0.0).any()) {
                b.error("hi", "every upper bound must be at least the lower bound");
                ok = false;
                continue;
            }
            boxes.push_back({*lo, *hi});
        }
        return ok ? std::optional(boxes) : std::nullopt;
    }

    std::optional<PayoffSpec> payoff(const std::string& key, bool allow_cosine) {
        Section b = s_.section(key, true);
        PayoffSpec spec;
        auto type = b.required<std::string>("type");
        bool ok = type.has_value();
        if (type) {
            spec.type = *type;
            const std::set<std::string> kinds = allow_cosine
                                                    ? std::set<std::string>{"halfspace", "constant", "clamped-linear", "cosine"}
                                                    : std::set<std::string>{"halfspace", "constant", "clamped-linear"};
            if (!kinds.count(spec.type)) {
                std::string list;
                for (const auto& k : kinds) list += (list.empty() ? "" : ", ") + k;
                b.error("type", "unknown type '" + spec.type + "' (expected one of: " + list + ")");
                ok = false;
            }
        }
        if (ok && spec.type != "constant") {
            spec.axis = b.value_or<int>("axis", 1);
            if (d_ > 0 && (spec.axis < 1 || spec.axis > d_)) {
                b.error("axis", "axis must lie in 1.." + std::to_string(d_));
                ok = false;
            }
        }
        if (ok && spec.type == "halfspace") spec.threshold = b.value_or<double>("threshold", 0.0);
        if (ok && spec.type == "constant") spec.value = b.value_or<double>("value", 1.0);
        if (ok && spec.type == "clamped-linear") {
            spec.slope = b.value_or<double>("slope", 1.0);
            spec.clamp = b.value_or<double>("clamp", 10.0);
            if (!(spec.clamp > 0.0)) {
                b.error("clamp", "clamp must be positive");
                ok = false;
            }
        }
        if (ok && spec.type == "cosine") spec.frequency = b.value_or<double>("frequency", 1.0);
        b.finish();
        return ok ? std::optional(spec) : std::nullopt;
    }

    [[nodiscard]] static std::string num(double v) {
        std::ostringstream out;
        out << v;
        return out.str();
    }

    [[nodiscard]] double regularity_scale(double r) const { return indices_ ? indices_->regularity_scale(r) : 1.0; }

    Section& s_;
    const std::optional<StableIndexSet>& indices_;
    Eigen::Index d_;
};

template <class Fn>
void library_check(Section& s, const std::string& key, Fn&& fn) {
    try {
        fn();
    } catch (const std::invalid_argument& e) {
        s.error(key, e.what());
    }
}

std::optional<ExperimentParams> parse_params(Experiment experiment, Section& s,
                                             const std::optional<StableIndexSet>& indices) {
    ParamParser p(s, indices);
    switch (experiment) {
    case Experiment::exit_time: {
        ExitTimeParams out;
        auto center = p.point("center");
        auto r_list = s.number_list("r_list", true);
        auto start = p.point("start", false);
        bool ok = center && r_list;
        if (r_list) {
            if (r_list->empty()) s.error("r_list", "at least one radius is required"), ok = false;
            for (std::size_t i = 0; i < r_list->size(); ++i)
                if (!((*r_list)[i] > 0.0 && (*r_list)[i] <= 1.0))
                    s.error("r_list", "r_list[" + std::to_string(i + 1) + "] = " + ParamParser::num((*r_list)[i]) +
                                          " must lie in (0,1]"),
                        ok = false;
        }
        if (!ok) return std::nullopt;
        out.center = *center;
        out.r_list = *r_list;
        out.start = start;
        return out;
    }
    case Experiment::jump_exit: {
        JumpExitParams out;
        auto center = p.point("center");
        auto r = p.scale_r("r");
        auto R_list = s.number_list("R_list", true);
        bool ok = center && r && R_list;
        if (R_list) {
            if (R_list->empty()) s.error("R_list", "at least one outer radius is required"), ok = false;
            for (std::size_t i = 0; i < R_list->size(); ++i) {
                const double R = (*R_list)[i];
                if (r && !(R >= 2.0 * *r))
                    s.error("R_list", "R_list[" + std::to_string(i + 1) + "] = " + ParamParser::num(R) +
                                          " violates the hypothesis R >= 2r (r = " + ParamParser::num(*r) + ")"),
                        ok = false;
                if (!(R > 0.0 && R <= 1.0))
                    s.error("R_list", "R_list[" + std::to_string(i + 1) + "] = " + ParamParser::num(R) +
                                          " must lie in (0,1]"),
                        ok = false;
            }
        }
        if (!ok) return std::nullopt;
        out.center = *center;
        out.r = *r;
        out.R_list = *R_list;
        return out;
    }
    case Experiment::targeted_jump: {
        TargetedJumpParams out;
        auto x0 = p.point("x0");
        auto axis = s.required<int>("axis");
        auto xi = s.required<double>("xi");
        auto gammas = s.number_list("gamma", true);
        auto t0 = p.positive("t0");
        auto r = p.scale_r("r", 1.0);
        auto theta = s.optional<double>("targeting_threshold");
        bool ok = x0 && axis && xi && gammas && t0 && r;
        if (axis && p.d_ > 0 && (*axis < 1 || *axis > p.d_))
            s.error("axis", "axis must lie in 1.." + std::to_string(p.d_)), ok = false;
        if (r && indices) {
            const double scale = p.regularity_scale(*r);
            if (xi && !(std::abs(*xi) <= scale))
                s.error("xi", "xi = " + ParamParser::num(*xi) + " must lie in [-r^(alpha_max/alpha_min), r^(alpha_max/alpha_min)] = [" +
                                  ParamParser::num(-scale) + ", " + ParamParser::num(scale) + "]"),
                    ok = false;
            if (gammas)
                for (double g : *gammas)
                    if (!(g > 0.0 && g < scale))
                        s.error("gamma", "gamma = " + ParamParser::num(g) + " must lie in (0, r^(alpha_max/alpha_min)) = (0, " +
                                             ParamParser::num(scale) + ")"),
                            ok = false;
        }
        if (theta && xi && *xi != 0.0 && !(*theta > 0.0 && *theta < std::abs(*xi)))
            s.error("targeting_threshold", "targeting_threshold must lie in (0, |xi|)"), ok = false;
        if (!ok) return std::nullopt;
        out.x0 = *x0;
        out.axis = *axis;
        out.xi = *xi;
        out.gamma_list = *gammas;
        out.t0 = *t0;
        out.r = *r;
        out.targeting_threshold = theta;
        return out;
    }
    case Experiment::tube: {
        TubeParams out;
        auto x0 = p.point("x0");
        auto path = s.required<std::vector<Vec>>("path");
        auto t0 = p.positive("t0");
        auto eps = s.number_list("epsilon", true);
        auto r = p.scale_r("r", 1.0);
        bool ok = x0 && path && t0 && eps && r;
        if (path && x0) {
            if (path->empty() || path->front().size() != x0->size() || (path->front() - *x0).norm() != 0.0)
                s.error("path", "the path must start at x0"), ok = false;
            else if (indices && r) {
                const AnisotropicBox box(*x0, *r, 1.0, *indices);
                for (std::size_t i = 0; i < path->size(); ++i)
                    if ((*path)[i].size() != x0->size() || !box.contains((*path)[i]))
                        s.error("path", "path point " + std::to_string(i + 1) + " lies outside M_r(x0)"), ok = false;
            }
        }
        if (eps && r && indices) {
            const double scale = p.regularity_scale(*r);
            for (double e : *eps)
                if (!(e > 0.0 && e < scale))
                    s.error("epsilon", "epsilon = " + ParamParser::num(e) + " must lie in (0, r^(alpha_max/alpha_min)) = (0, " +
                                           ParamParser::num(scale) + ")"),
                        ok = false;
        }
        if (!ok) return std::nullopt;
        out.x0 = *x0;
        out.path = *path;
        out.t0 = *t0;
        out.epsilon_list = *eps;
        out.r = *r;
        return out;
    }
    case Experiment::hit: {
        HitParams out;
        auto x0 = p.point("x0");
        auto enclosing = p.box("enclosing");
        auto targets = s.section_list("targets", true);
        bool ok = x0 && enclosing && !targets.empty();
        if (s.has("targets") && targets.empty()) s.error("targets", "at least one target is required");
        std::optional<AnisotropicBox> box;
        if (enclosing && indices) box.emplace(enclosing->center, enclosing->r, enclosing->k, *indices);
        if (box && x0) {
            const AnisotropicBox half(box->center(), box->r(), 0.5 * box->k(), *indices);
            if (!half.contains(*x0)) s.error("x0", "x0 must lie in the half-dilated box M^(1/2)"), ok = false;
        }
        for (auto& t : targets) {
            TargetSpec spec;
            const bool has_scale = t.has("scale"), has_boxes = t.has("boxes");
            if (has_scale == has_boxes) {
                t.error("", "give exactly one of 'scale' or 'boxes'");
                ok = false;
            }
            if (has_scale) {
                auto sc = t.required<double>("scale");
                if (sc && !(*sc > 0.0 && *sc <= 1.0)) t.error("scale", "scale must lie in (0,1]"), ok = false;
                spec.scale = sc;
                if (!sc) ok = false;
            }
            if (has_boxes) {
                ParamParser tp(t, indices);
                auto boxes = tp.axis_boxes("boxes");
                if (!boxes) ok = false;
                else spec.boxes = *boxes;
                if (boxes && box) {
                    const AxisBox hull = box->closure();
                    double volume = 0.0;
                    for (const auto& b : *boxes) {
                        volume += b.volume();
                        for (Eigen::Index i = 0; i < hull.lo.size(); ++i)
                            if (b.lo[i] < hull.lo[i] || b.hi[i] > hull.hi[i]) {
                                t.error("boxes", "target boxes must lie inside the enclosing box");
                                ok = false;
                                break;
                            }
                    }
                    if (!(volume > 0.0)) t.error("boxes", "target must have positive volume"), ok = false;
                }
            }
            t.finish();
            out.targets.push_back(spec);
        }
        if (!ok) return std::nullopt;
        out.x0 = *x0;
        out.enclosing = *enclosing;
        return out;
    }
    case Experiment::harmonic:
    case Experiment::holder: {
        HarmonicParams h;
        auto payoff = p.payoff("payoff", false);
        auto domain = p.box("domain");
        h.points_per_axis = s.value_or<int>("points_per_axis", 5);
        h.fill = s.value_or<double>("fill", 0.8);
        auto points = s.optional<std::vector<Vec>>("points");
        bool ok = payoff && domain;
        if (h.points_per_axis < 1) s.error("points_per_axis", "points_per_axis must be at least 1"), ok = false;
        if (!(h.fill > 0.0 && h.fill < 1.0)) s.error("fill", "fill must lie in (0,1)"), ok = false;
        if (points && domain && indices) {
            const AnisotropicBox box(domain->center, domain->r, domain->k, *indices);
            for (std::size_t i = 0; i < points->size(); ++i)
                if ((*points)[i].size() != p.d_ || !box.contains((*points)[i]))
                    s.error("points", "point " + std::to_string(i + 1) + " lies outside the domain"), ok = false;
            h.points = *points;
        }
        if (experiment == Experiment::harmonic) {
            if (!ok) return std::nullopt;
            h.payoff = *payoff;
            h.domain = *domain;
            return h;
        }
        HolderParams out;
        out.options.min_pairs = s.value_or<std::size_t>("min_pairs", 10);
        out.options.separation_se = s.value_or<double>("separation_se", 3.0);
        out.options.max_ci_fraction = s.value_or<double>("max_ci_fraction", 0.5);
        out.options.sup_norm = s.optional<double>("sup_norm");
        const std::size_t n_points =
            h.points.empty() ? static_cast<std::size_t>(std::pow(h.points_per_axis, static_cast<double>(std::max<Eigen::Index>(p.d_, 1))))
                             : h.points.size();
        if (out.options.min_pairs < 10) s.error("min_pairs", "min_pairs must be at least 10"), ok = false;
        if (p.d_ > 0 && n_points < 10)
            s.error(points ? "points" : "points_per_axis", "the Holder fit needs at least 10 grid points"), ok = false;
        if (!ok) return std::nullopt;
        h.payoff = *payoff;
        h.domain = *domain;
        out.harmonic = h;
        return out;
    }
    case Experiment::oscillation: {
        OscillationParams out;
        auto x0 = p.point("x0");
        auto payoff = p.payoff("payoff", false);
        auto domain = x0 ? p.box("domain", *x0) : p.box("domain", Vec());
        out.rho = s.value_or<double>("rho", 0.6);
        out.k_max = s.value_or<int>("k_max", 4);
        out.points_per_axis = s.value_or<int>("points_per_axis", 3);
        out.fill = s.value_or<double>("fill", 0.9);
        bool ok = x0 && payoff && domain;
        if (!(out.rho > 0.0 && out.rho < 1.0)) s.error("rho", "rho must lie in (0,1)"), ok = false;
        if (out.k_max < 1) s.error("k_max", "k_max must be at least 1"), ok = false;
        if (out.points_per_axis < 2) s.error("points_per_axis", "points_per_axis must be at least 2"), ok = false;
        if (!(out.fill > 0.0 && out.fill < 1.0)) s.error("fill", "fill must lie in (0,1)"), ok = false;
        if (ok && indices) {
            const AxisBox hull = AnisotropicBox(domain->center, domain->r, domain->k, *indices).closure();
            const AxisBox top = AnisotropicBox(*x0, 1.0, 1.0, *indices).closure();
            for (Eigen::Index i = 0; i < hull.lo.size(); ++i)
                if (!(top.lo[i] > hull.lo[i] && top.hi[i] < hull.hi[i])) {
                    s.error("domain", "the nested boxes M_{rho^k}(x0) must lie strictly inside the domain");
                    ok = false;
                    break;
                }
        }
        if (!ok) return std::nullopt;
        out.x0 = *x0;
        out.payoff = *payoff;
        out.domain = *domain;
        return out;
    }
    case Experiment::levy_system: {
        LevySystemParams out;
        auto x0 = p.point("x0");
        auto from = x0 ? p.box("from", *x0) : p.box("from", Vec());
        auto to = p.axis_boxes("to");
        auto t = p.positive("t");
        bool ok = x0 && from && to && t;
        if (ok && indices) {
            const AnisotropicBox d(from->center, from->r, from->k, *indices);
            if (!(BoxUnion{*to}.distance_to(d.closure()) > 0.0))
                s.error("to", "the target set E must have positive distance from D"), ok = false;
        }
        if (!ok) return std::nullopt;
        out.x0 = *x0;
        out.from = *from;
        out.to = *to;
        out.t = *t;
        return out;
    }
    case Experiment::dynkin: {
        DynkinParams out;
        auto x0 = p.point("x0");
        auto f = p.payoff("test_function", true);
        auto t_list = s.number_list("t_list", true);
        Section q = s.section("quadrature", false);
        out.quadrature.inner_cut = q.value_or<double>("inner_cut", out.quadrature.inner_cut);
        out.quadrature.outer_cut = q.value_or<double>("outer_cut", out.quadrature.outer_cut);
        out.quadrature.tolerance = q.value_or<double>("tolerance", out.quadrature.tolerance);
        out.quadrature.max_refinements = q.value_or<std::size_t>("max_refinements", out.quadrature.max_refinements);
        q.finish();
        bool ok = x0 && f && t_list;
        library_check(s, "quadrature", [&] { out.quadrature.validate(); });
        if (t_list)
            for (double t : *t_list)
                if (!(t > 0.0)) s.error("t_list", "every t must be positive"), ok = false;
        if (!ok) return std::nullopt;
        out.x0 = *x0;
        out.test_function = *f;
        out.test_function.origin = *x0;
        out.t_list = *t_list;
        return out;
    }
    case Experiment::driver_selftest: {
        SelftestParams out;
        auto gammas = s.number_list("gammas", true);
        auto xis = s.number_list("xis", true);
        out.n_samples = s.value_or<std::size_t>("n_samples", 1000000);
        bool ok = gammas && xis;
        if (gammas)
            for (double g : *gammas)
                if (!(g > 0.0 && g < 2.0))
                    s.error("gammas", "gamma = " + ParamParser::num(g) + " is outside the open interval (0,2)"), ok = false;
        if (out.n_samples < 2) s.error("n_samples", "n_samples must be at least 2"), ok = false;
        if (!ok) return std::nullopt;
        out.gammas = *gammas;
        out.xis = *xis;
        return out;
    }
    }
    return std::nullopt;
}

} // namespace

ParseResult parse_config_text(const std::string& text) {
    ParseResult result;
    auto& diags = result.diagnostics;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        diags.push_back({e.mark.line >= 0 ? e.mark.line + 1 : 0, "", "YAML syntax error: " + e.msg});
        return result;
    }

    ExperimentConfig config;
    Section top(root, "", 1, diags, config.resolved);

    std::optional<Experiment> experiment;
    if (auto name = top.required<std::string>("experiment")) {
        experiment = parse_experiment(*name);
        if (!experiment) {
            std::string list;
            for (const auto& [value, n] : experiment_names) list += (list.empty() ? "" : ", ") + std::string(n);
            top.error("experiment", "unknown experiment '" + *name + "' (expected one of: " + list + ")");
        }
    }
    auto seed = top.required<std::uint64_t>("seed");
    const bool needs_model = experiment != Experiment::driver_selftest;

    std::optional<StableIndexSet> indices;
    if (needs_model) {
        if (auto alphas = top.number_list("indices", true)) {
            bool ok = true;
            if (alphas->size() < 2)
                top.error("indices", "at least two stability indices are required (d >= 2)"), ok = false;
            for (std::size_t i = 0; i < alphas->size(); ++i) {
                const double a = (*alphas)[i];
                if (!(a > 0.0 && a < 2.0)) {
                    top.error("indices", "indices[" + std::to_string(i + 1) + "] = " + ParamParser::num(a) +
                                             " is outside the open interval (0,2)");
                    ok = false;
                } else if (a < stability_margin || a > 2.0 - stability_margin) {
                    top.error("indices", "indices[" + std::to_string(i + 1) + "] = " + ParamParser::num(a) +
                                             " is within 1e-3 of the ends of (0,2)");
                    ok = false;
                }
            }
            if (ok) indices.emplace(*alphas);
        }

        Section coeff = top.section("coefficients", true);
        const auto d = indices ? static_cast<Eigen::Index>(indices->dimension()) : 0;
        if (auto preset = coeff.required<std::string>("preset")) {
            config.coefficients.name = *preset;
            if (*preset == "identity") {
            } else if (*preset == "constant") {
                if (auto m = coeff.required<Mat>("matrix")) {
                    config.coefficients.matrix = *m;
                    if (d > 0 && (m->rows() != d || m->cols() != d))
                        coeff.error("matrix", "expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
                    else if (m->rows() == m->cols())
                        library_check(coeff, "matrix", [&] { (void)ConstantField{*m}; });
                }
            } else if (*preset == "diagonal") {
                if (auto diag = coeff.required<Vec>("diagonal")) {
                    config.coefficients.diagonal = *diag;
                    if (d > 0 && diag->size() != d)
                        coeff.error("diagonal", "expected " + std::to_string(d) + " entries");
                    else
                        library_check(coeff, "diagonal", [&] { (void)ConstantField{Mat(diag->asDiagonal())}; });
                }
            } else if (*preset == "rotation") {
                config.coefficients.theta0 = coeff.value_or<double>("theta0", 0.0);
                config.coefficients.amplitude = coeff.value_or<double>("amplitude", 0.0);
                config.coefficients.frequency = coeff.value_or<double>("frequency", 1.0);
                config.coefficients.scales = coeff.value_or<Vec>("scales", d > 0 ? Vec(Vec::Ones(d)) : Vec());
                if (d > 0) {
                    library_check(coeff, "scales", [&] {
                        (void)RotationField(d, config.coefficients.theta0, config.coefficients.amplitude,
                                      config.coefficients.frequency, config.coefficients.scales);
                    });
                }
            } else {
                coeff.error("preset", "unknown preset '" + *preset + "' (expected identity, constant, diagonal or rotation)");
            }
        }
        coeff.finish();

        Section sampling = top.section("sampling", true);
        if (auto n = sampling.required<std::size_t>("n_paths")) {
            config.sampling.n_paths = *n;
            if (*n < 2) sampling.error("n_paths", "n_paths must be at least 2");
        }
        config.sampling.jump_threshold = sampling.optional<double>("jump_threshold");
        config.sampling.grid_step = sampling.optional<double>("grid_step");
        config.sampling.horizon = sampling.optional<double>("horizon");
        config.sampling.max_censored_fraction = sampling.value_or<double>("max_censored_fraction", 0.01);
        for (const auto& [key, value] : {std::pair{"jump_threshold", config.sampling.jump_threshold},
                                         std::pair{"grid_step", config.sampling.grid_step},
                                         std::pair{"horizon", config.sampling.horizon}})
            if (value && !(*value > 0.0)) sampling.error(key, std::string(key) + " must be positive");
        const int given = (config.sampling.jump_threshold ? 1 : 0) + (config.sampling.grid_step ? 1 : 0) +
                          (config.sampling.horizon ? 1 : 0);
        if (given != 0 && given != 3)
            sampling.error("", "give all of jump_threshold, grid_step and horizon, or none (then they are scaled to each box)");
        if (!(config.sampling.max_censored_fraction >= 0.0 && config.sampling.max_censored_fraction < 1.0))
            sampling.error("max_censored_fraction", "max_censored_fraction must lie in [0,1)");
        sampling.finish();
    }

    Section params = top.section("parameters", true);
    std::optional<ExperimentParams> parsed;
    if (experiment) parsed = parse_params(*experiment, params, indices);
    params.finish();
    top.finish();

    if (!diags.empty()) return result;
    config.experiment = *experiment;
    config.seed = *seed;
    config.indices = indices;
    config.params = std::move(*parsed);
    result.config = std::move(config);
    return result;
}

ParseResult load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        ParseResult result;
        result.diagnostics.push_back({0, path.string(), "cannot read the configuration file"});
        return result;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

} // namespace anisolab::cli
