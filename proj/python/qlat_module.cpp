#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qlat/api.hpp"
#include "qlat/embed.hpp"
#include "qlat/spinor.hpp"

namespace py = pybind11;

namespace {

// job documents cross the boundary as JSON strings; python side works with dicts
std::string run_job_str(const std::string& job, bool check_fast_path) {
    auto j = qlat::api::json::parse(job);
    return qlat::api::run_job(j, check_fast_path).dump();
}

qlat::Mat gram_from_rows(const qlat::FieldPtr& K, const std::vector<std::vector<std::string>>& rows) {
    int n = (int)rows.size();
    qlat::Mat G = qlat::mat_make(K, n, n);
    for (int i = 0; i < n; ++i) {
        if ((int)rows[i].size() != n) qlat::fail("MalformedInput", "gram: ragged rows");
        for (int j = 0; j < n; ++j) {
            mpq_class r(rows[i][j]);
            r.canonicalize();
            G.at(i, j) = K->from_rat(r);
        }
    }
    return G;
}

}  // namespace

PYBIND11_MODULE(_qlat, m) {
    m.doc() = "embeddings, spinor norms and transporter norms of quadratic lattices "
              "over complete discrete valuation rings of odd residue characteristic";

    m.def("run_job", &run_job_str, py::arg("job"), py::arg("check_fast_path") = false,
          "run a JSON job document (same schema as the CLI) and return the JSON report");

    m.def(
        "hilbert_symbol",
        [](long p, const std::string& a, const std::string& b) {
            auto K = qlat::LocalField::padic(mpz_class(p));
            mpq_class qa(a), qb(b);
            qa.canonicalize();
            qb.canonicalize();
            return K->hilbert(K->from_rat(qa), K->from_rat(qb));
        },
        py::arg("p"), py::arg("a"), py::arg("b"), "Hilbert symbol over Q_p, odd p");

    m.def(
        "is_square",
        [](long p, const std::string& a) {
            auto K = qlat::LocalField::padic(mpz_class(p));
            mpq_class qa(a);
            qa.canonicalize();
            return K->is_square(K->from_rat(qa));
        },
        py::arg("p"), py::arg("a"), "square test in Q_p, odd p");

    m.def(
        "embeds",
        [](long p, const std::vector<std::vector<std::string>>& gn,
           const std::vector<std::vector<std::string>>& gm) {
            auto K = qlat::LocalField::padic(mpz_class(p));
            auto N = qlat::make_lattice(K, gram_from_rows(K, gn));
            auto M = qlat::make_lattice(K, gram_from_rows(K, gm));
            return qlat::omeara_embeds(N, M);
        },
        py::arg("p"), py::arg("gram_n"), py::arg("gram_m"),
        "O'Meara embedding decision for lattices over Z_p, odd p (rational entries as strings)");

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const qlat::Error& e) {
            PyErr_SetString(PyExc_ValueError, (e.code + ": " + e.what()).c_str());
        }
    });
}
