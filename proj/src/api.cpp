#include "qlat/api.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "qlat/embed.hpp"
#include "qlat/global.hpp"
#include "qlat/spinor.hpp"

namespace qlat::api {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
    fail("MalformedInput", field + ": " + msg);
}

// ------------------------------------------------------------ base field

struct BaseSpec {
    std::string kind;  // padic | laurent | polyring
    long p = 0;        // padic
    uint32_t q = 0;    // laurent / polyring
};

BaseSpec parse_base(const json& job) {
    if (!job.contains("base") || !job["base"].is_object()) bad("base", "missing field descriptor");
    const json& b = job["base"];
    BaseSpec s;
    if (!b.contains("kind") || !b["kind"].is_string()) bad("base.kind", "expected a string");
    s.kind = b["kind"].get<std::string>();
    if (s.kind == "padic") {
        if (!b.contains("p") || !b["p"].is_number_integer()) bad("base.p", "expected an integer prime");
        s.p = b["p"].get<long>();
        if (s.p < 2) bad("base.p", "expected a prime >= 3");
    } else if (s.kind == "laurent" || s.kind == "polyring") {
        if (!b.contains("q") || !b["q"].is_number_integer()) bad("base.q", "expected an integer prime power");
        long q = b["q"].get<long>();
        if (q < 3) bad("base.q", "expected an odd prime power >= 3");
        s.q = (uint32_t)q;
    } else {
        bad("base.kind", "unknown kind '" + s.kind + "'");
    }
    return s;
}

json echo_base(const BaseSpec& s) {
    json b;
    b["kind"] = s.kind;
    if (s.kind == "padic")
        b["p"] = s.p;
    else
        b["q"] = (long)s.q;
    return b;
}

// ------------------------------------------------------------ elements

mpq_class parse_rat(const json& v, const std::string& field) {
    if (v.is_number_integer()) return mpq_class(v.get<long>());
    if (!v.is_string()) bad(field, "expected an integer or a rational string \"a/b\"");
    std::string s = v.get<std::string>();
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            mpz_class a(s);
            return mpq_class(a);
        }
        mpz_class a(s.substr(0, slash)), b(s.substr(slash + 1));
        if (b <= 0) bad(field, "denominator must be positive");
        mpq_class r(a, b);
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        bad(field, "not a valid rational literal: '" + s + "'");
    }
}

std::string rat_str(const mpq_class& r) { return r.get_str(); }

FqPoly parse_poly(const FqPtr& F, const json& v, const std::string& field) {
    if (!v.is_array()) bad(field, "expected a coefficient array (lowest degree first)");
    std::vector<FqElem> c;
    for (size_t i = 0; i < v.size(); ++i) {
        const json& ci = v[i];
        if (!ci.is_number_integer()) bad(field + "[" + std::to_string(i) + "]", "expected an integer in [0, q)");
        long x = ci.get<long>();
        if (x < 0 || (uint64_t)x >= F->q) bad(field + "[" + std::to_string(i) + "]", "coefficient out of [0, q)");
        c.push_back(F->element_from_index((uint64_t)x));
    }
    return fqp_make(F, std::move(c));
}

json poly_echo(const FqPoly& p) {
    json a = json::array();
    for (const auto& c : p.c) a.push_back((long)p.F->index_of(c));
    return a;
}

RatFunc parse_rf(const FqPtr& F, const json& v, const std::string& field) {
    if (v.is_array()) return rf_from_poly(parse_poly(F, v, field));
    if (v.is_object() && v.contains("num") && v.contains("den")) {
        FqPoly num = parse_poly(F, v["num"], field + ".num");
        FqPoly den = parse_poly(F, v["den"], field + ".den");
        if (den.is_zero()) bad(field + ".den", "zero denominator");
        return rf_make(num, den);
    }
    bad(field, "expected a polynomial array or {num, den}");
}

json rf_echo(const RatFunc& r) {
    if (r.den.deg() == 0) return poly_echo(r.num);
    json o;
    o["num"] = poly_echo(r.num);
    o["den"] = poly_echo(r.den);
    return o;
}

FElem parse_elem(const FieldPtr& K, const json& v, const std::string& field) {
    if (K->kind == FKind::Padic) return K->from_rat(parse_rat(v, field));
    if (K->kind == FKind::Laurent) return K->from_rf(parse_rf(K->coeff, v, field));
    if (v.is_object() && v.contains("coords")) {
        const json& cs = v["coords"];
        if (!cs.is_array() || (int)cs.size() != K->deg)
            bad(field + ".coords", "expected " + std::to_string(K->deg) + " coordinates");
        std::vector<FElem> coords;
        for (size_t i = 0; i < cs.size(); ++i)
            coords.push_back(parse_elem(K->parent, cs[i], field + ".coords[" + std::to_string(i) + "]"));
        return K->from_coords(std::move(coords));
    }
    // base-field literal, embedded up the tower
    return K->embed(parse_elem(K->base(), v, field));
}

json elem_echo(const FieldPtr& K, const FElem& x) {
    if (K->kind == FKind::Padic) return rat_str(x.rat());
    if (K->kind == FKind::Laurent) return rf_echo(x.rf());
    json o;
    json coords = json::array();
    for (const auto& c : x.vec()) coords.push_back(elem_echo(K->parent, c));
    o["coords"] = coords;
    return o;
}

Mat parse_gram(const FieldPtr& K, const json& v, const std::string& field, bool require_symmetric = true) {
    if (!v.is_array() || v.empty()) bad(field, "expected a non-empty array of rows");
    int n = (int)v.size();
    int m = -1;
    for (int i = 0; i < n; ++i)
        if (!v[i].is_array()) bad(field + "[" + std::to_string(i) + "]", "expected a row array");
    m = (int)v[0].size();
    Mat G = mat_make(K, n, m);
    for (int i = 0; i < n; ++i) {
        if ((int)v[i].size() != m) bad(field + "[" + std::to_string(i) + "]", "ragged rows");
        for (int j = 0; j < m; ++j)
            G.at(i, j) = parse_elem(K, v[i][j], field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
    if (require_symmetric) {
        if (n != m) bad(field, "gram matrix must be square");
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (!K->eq(G.at(i, j), G.at(j, i)))
                    bad(field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                        "gram matrix must be symmetric");
    }
    return G;
}

json mat_echo(const FieldPtr& K, const Mat& A) {
    json rows = json::array();
    for (int i = 0; i < A.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < A.cols; ++j) row.push_back(elem_echo(K, A.at(i, j)));
        rows.push_back(row);
    }
    return rows;
}

// ------------------------------------------------------------ towers

ExtensionTower parse_tower(const FieldPtr& base, const json& job) {
    std::vector<TowerStepSpec> steps;
    if (!job.contains("tower")) return make_tower(base, steps);
    const json& t = job["tower"];
    if (!t.is_object() || !t.contains("steps") || !t["steps"].is_array())
        bad("tower.steps", "expected an array of steps");
    // build incrementally to parse eisenstein coefficients over the right level
    ExtensionTower cur = make_tower(base, {});
    std::vector<TowerStepSpec> acc;
    for (size_t i = 0; i < t["steps"].size(); ++i) {
        const json& s = t["steps"][i];
        std::string f = "tower.steps[" + std::to_string(i) + "]";
        if (!s.is_object() || !s.contains("kind") || !s["kind"].is_string()) bad(f + ".kind", "expected a string");
        std::string kind = s["kind"].get<std::string>();
        TowerStepSpec spec;
        if (kind == "unramified") {
            if (!s.contains("f") || !s["f"].is_number_integer() || s["f"].get<long>() < 1)
                bad(f + ".f", "expected a positive integer");
            spec.unram = true;
            spec.f = (int)s["f"].get<long>();
        } else if (kind == "eisenstein") {
            if (!s.contains("coeffs") || !s["coeffs"].is_array() || s["coeffs"].empty())
                bad(f + ".coeffs", "expected the lower coefficients of the monic step polynomial");
            spec.unram = false;
            for (size_t j = 0; j < s["coeffs"].size(); ++j)
                spec.eisen.push_back(parse_elem(cur.top, s["coeffs"][j], f + ".coeffs[" + std::to_string(j) + "]"));
        } else {
            bad(f + ".kind", "unknown step kind '" + kind + "'");
        }
        acc.push_back(spec);
        cur = make_tower(base, acc);
    }
    return cur;
}

json tower_echo(const ExtensionTower& t) {
    json steps = json::array();
    for (size_t i = 1; i < t.levels.size(); ++i) {
        const auto& lvl = t.levels[i];
        json s;
        if (lvl->kind == FKind::Unram) {
            s["kind"] = "unramified";
            s["f"] = lvl->deg;
        } else {
            s["kind"] = "eisenstein";
            json cs = json::array();
            for (const auto& c : lvl->stepc) cs.push_back(elem_echo(lvl->parent, c));
            s["coeffs"] = cs;
        }
        steps.push_back(s);
    }
    json o;
    o["steps"] = steps;
    return o;
}

// ------------------------------------------------------------ output pieces

json subgroup_json(SCSubgroup s) {
    json a = json::array();
    for (const auto& e : scs_str_sorted(s)) a.push_back(e);
    return a;
}

json jordan_json(const FieldPtr& K, const JordanSplitting& J) {
    json comps = json::array();
    for (const auto& c : J.comps) {
        SpaceInvariants inv = invariants(QuadSpace{K, c.gram});
        json e = json::array();
        e.push_back(c.s);
        e.push_back(c.gram.rows);
        e.push_back(sc_str(inv.det_class));
        e.push_back(inv.hasse);
        comps.push_back(e);
    }
    return comps;
}

std::string elem_str_field(const FieldPtr& K, const FElem& x) { return K->str(x); }

json witness_matrix_json(const FieldPtr& K, const Mat& T) {
    json rows = json::array();
    for (int i = 0; i < T.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < T.cols; ++j) row.push_back(elem_str_field(K, T.at(i, j)));
        rows.push_back(row);
    }
    return rows;
}

FieldPtr build_local_base(const BaseSpec& b) {
    if (b.kind == "padic") return LocalField::padic(mpz_class(b.p));
    if (b.kind == "laurent") return LocalField::laurent(b.q);
    bad("base.kind", "'" + b.kind + "' is not a local base (use padic or laurent)");
}

}  // namespace

json run_job(const json& job, bool check_fast_path) {
    if (!job.is_object()) fail("MalformedInput", "job: expected a JSON object");
    if (!job.contains("command") || !job["command"].is_string())
        fail("MalformedInput", "command: missing or not a string");
    std::string cmd = job["command"].get<std::string>();
    BaseSpec base = parse_base(job);

    json report;
    report["command"] = cmd;
    json echo;
    echo["command"] = cmd;
    echo["base"] = echo_base(base);
    json verdicts;
    json witnesses;
    json trace = json::array();

    auto need = [&](const char* key) -> const json& {
        if (!job.contains(key)) bad(key, "missing required field");
        return job[key];
    };

    if (cmd == "hilbert") {
        FieldPtr K = build_local_base(base);
        FElem a = parse_elem(K, need("a"), "a");
        FElem b = parse_elem(K, need("b"), "b");
        if (K->is_zero(a)) bad("a", "hilbert symbol arguments must be nonzero");
        if (K->is_zero(b)) bad("b", "hilbert symbol arguments must be nonzero");
        echo["a"] = elem_echo(K, a);
        echo["b"] = elem_echo(K, b);
        verdicts["symbol"] = K->hilbert(a, b);
    } else if (cmd == "jordan") {
        FieldPtr K = build_local_base(base);
        Mat G = parse_gram(K, need("gram"), "gram");
        echo["gram"] = mat_echo(K, G);
        QuadLattice L = make_lattice(K, G);
        JordanSplitting J = jordan_split(L);
        verdicts["components"] = jordan_json(K, J);
        witnesses["transition"] = witness_matrix_json(K, J.transition);
    } else if (cmd == "spinor") {
        FieldPtr K = build_local_base(base);
        Mat G = parse_gram(K, need("gram"), "gram");
        echo["gram"] = mat_echo(K, G);
        SpinorNorms s = kneser_spinor_norms(make_lattice(K, G));
        verdicts["theta_O"] = subgroup_json(s.theta_O);
        verdicts["theta_O_plus"] = subgroup_json(s.theta_O_plus);
    } else if (cmd == "embeds" || cmd == "find-embedding") {
        FieldPtr K = build_local_base(base);
        Mat GN = parse_gram(K, need("gram_n"), "gram_n");
        Mat GM = parse_gram(K, need("gram_m"), "gram_m");
        echo["gram_n"] = mat_echo(K, GN);
        echo["gram_m"] = mat_echo(K, GM);
        QuadLattice N = make_lattice(K, GN), M = make_lattice(K, GM);
        if (cmd == "embeds") {
            verdicts["embeds"] = omeara_embeds(N, M);
        } else {
            auto w = find_embedding(N, M);
            verdicts["embeds"] = (bool)w;
            if (w) {
                witnesses["matrix"] = witness_matrix_json(K, w->T);
                witnesses["exact"] = w->exact;
                if (!w->exact) witnesses["cert_level"] = w->cert_level;
            }
        }
    } else if (cmd == "transporter") {
        FieldPtr K = build_local_base(base);
        Mat GM = parse_gram(K, need("gram_m"), "gram_m");
        Mat inj = parse_gram(K, need("injection"), "injection", false);
        if (inj.rows != GM.rows) bad("injection", "height must match gram_m");
        echo["gram_m"] = mat_echo(K, GM);
        echo["injection"] = mat_echo(K, inj);
        QuadLattice M = make_lattice(K, GM);
        TransporterNorms tn = transporter_norms(M, inj, false);
        verdicts["theta_X"] = subgroup_json(tn.theta_X);
        verdicts["theta_X_plus"] = subgroup_json(tn.theta_X_plus);
        for (const auto& s : tn.trace) trace.push_back(s);
        if (check_fast_path) {
            TransporterNorms tf = transporter_norms(M, inj, true);
            verdicts["fast_path_match"] =
                (tf.theta_X == tn.theta_X && tf.theta_X_plus == tn.theta_X_plus);
        }
    } else if (cmd == "springer") {
        FieldPtr K = build_local_base(base);
        Mat GN = parse_gram(K, need("gram_n"), "gram_n");
        Mat GM = parse_gram(K, need("gram_m"), "gram_m");
        ExtensionTower t = parse_tower(K, job);
        echo["gram_n"] = mat_echo(K, GN);
        echo["gram_m"] = mat_echo(K, GM);
        echo["tower"] = tower_echo(t);
        SpringerReport r = springer_verify(make_lattice(K, GN), make_lattice(K, GM), t);
        verdicts["embeds_base"] = r.embeds_base;
        verdicts["embeds_ext"] = r.embeds_ext;
        verdicts["degree_odd"] = r.degree_odd;
        if (r.degree_odd) verdicts["consistent"] = r.consistent;
    } else if (cmd == "norm-principle") {
        FieldPtr K = build_local_base(base);
        Mat GM = parse_gram(K, need("gram_m"), "gram_m");
        Mat inj = parse_gram(K, need("injection"), "injection", false);
        if (inj.rows != GM.rows) bad("injection", "height must match gram_m");
        ExtensionTower t = parse_tower(K, job);
        echo["gram_m"] = mat_echo(K, GM);
        echo["injection"] = mat_echo(K, inj);
        echo["tower"] = tower_echo(t);
        NormPrincipleReport r = norm_principle_verify(make_lattice(K, GM), inj, t);
        verdicts["holds_X"] = r.holds_X;
        verdicts["holds_X_plus"] = r.holds_X_plus;
        verdicts["holds_O"] = r.holds_O;
        verdicts["holds_O_plus"] = r.holds_O_plus;
        json basej, normedj;
        basej["theta_X"] = subgroup_json(r.base_X);
        basej["theta_X_plus"] = subgroup_json(r.base_X_plus);
        basej["theta_O"] = subgroup_json(r.base_O);
        basej["theta_O_plus"] = subgroup_json(r.base_O_plus);
        normedj["theta_X"] = subgroup_json(r.normed_X);
        normedj["theta_X_plus"] = subgroup_json(r.normed_X_plus);
        normedj["theta_O"] = subgroup_json(r.normed_O);
        normedj["theta_O_plus"] = subgroup_json(r.normed_O_plus);
        verdicts["base"] = basej;
        verdicts["normed"] = normedj;
    } else if (cmd == "global-embeds") {
        if (base.kind != "polyring") bad("base.kind", "global-embeds requires a polyring base");
        FqPtr F;
        {
            // reuse laurent construction to validate q, then take its field
            FieldPtr tmp = LocalField::laurent(base.q);
            F = tmp->coeff;
        }
        const json& gnj = need("gram_n");
        const json& gmj = need("gram_m");
        auto parse_global = [&](const json& v, const std::string& field) {
            if (!v.is_array() || v.empty()) bad(field, "expected a non-empty array of rows");
            int n = (int)v.size();
            std::vector<RatFunc> g;
            for (int i = 0; i < n; ++i) {
                if (!v[i].is_array() || (int)v[i].size() != n) bad(field, "gram matrix must be square");
                for (int j = 0; j < n; ++j)
                    g.push_back(parse_rf(F, v[i][j],
                                         field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]"));
            }
            return make_global_lattice(F, n, std::move(g));
        };
        GlobalLattice N = parse_global(gnj, "gram_n");
        GlobalLattice M = parse_global(gmj, "gram_m");
        std::vector<Place> extra;
        if (job.contains("places")) {
            const json& pl = job["places"];
            if (!pl.is_array()) bad("places", "expected an array of place polynomials");
            for (size_t i = 0; i < pl.size(); ++i)
                extra.push_back(make_place(parse_poly(F, pl[i], "places[" + std::to_string(i) + "]")));
        }
        {
            json gn = json::array(), gm = json::array();
            for (int i = 0; i < N.n; ++i) {
                json row = json::array();
                for (int j = 0; j < N.n; ++j) row.push_back(rf_echo(N.at(i, j)));
                gn.push_back(row);
            }
            for (int i = 0; i < M.n; ++i) {
                json row = json::array();
                for (int j = 0; j < M.n; ++j) row.push_back(rf_echo(M.at(i, j)));
                gm.push_back(row);
            }
            echo["gram_n"] = gn;
            echo["gram_m"] = gm;
            if (!extra.empty()) {
                json pj = json::array();
                for (const auto& p : extra) pj.push_back(poly_echo(p.poly));
                echo["places"] = pj;
            }
        }
        GlobalEmbedReport r = everywhere_local_embeds(N, M, extra);
        json places = json::array();
        for (const auto& pv : r.checked) {
            json e;
            e["place"] = poly_echo(pv.place.poly);
            e["embeds"] = pv.embeds;
            places.push_back(e);
        }
        verdicts["places"] = places;
        verdicts["good_places_auto"] = r.good_places_auto;
        verdicts["overall"] = r.overall;
    } else {
        fail("MalformedInput", "command: unknown command '" + cmd + "'");
    }

    report["input_echo"] = echo;
    report["verdicts"] = verdicts;
    if (!witnesses.empty()) report["witnesses"] = witnesses;
    report["trace"] = trace;
    return report;
}

std::string render_text(const json& report) {
    std::ostringstream os;
    os << "command: " << report["command"].get<std::string>() << "\n";
    os << "verdicts:\n";
    for (auto& [k, v] : report["verdicts"].items()) os << "  " << k << " = " << v.dump() << "\n";
    if (report.contains("witnesses"))
        for (auto& [k, v] : report["witnesses"].items()) os << "witness " << k << " = " << v.dump() << "\n";
    if (report.contains("trace") && !report["trace"].empty()) {
        os << "trace:";
        for (auto& s : report["trace"]) os << " " << s.get<std::string>();
        os << "\n";
    }
    return os.str();
}

}  // namespace qlat::api
