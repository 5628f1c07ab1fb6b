#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "qlat/api.hpp"
#include "qlat/fq.hpp"

int main(int argc, char** argv) {
    CLI::App app{"decides embeddings of quadratic lattices over complete discrete valuation rings "
                 "of odd residue characteristic, computes integral spinor-norm and transporter-norm "
                 "groups, and verifies the local Springer theorem and norm principles"};
    std::string input;
    std::string format = "json";
    bool check_fast_path = false;
    app.add_option("--input", input, "job document (JSON)")->required();
    app.add_option("--format", format, "output format: json or text")->check(CLI::IsMember({"json", "text"}));
    app.add_flag("--check-fast-path", check_fast_path, "cross-check the transporter fast path");
    CLI11_PARSE(app, argc, argv);

    qlat::api::json job;
    {
        std::ifstream in(input);
        if (!in) {
            std::cerr << "input: cannot open '" << input << "'\n";
            return 2;
        }
        try {
            in >> job;
        } catch (const std::exception& e) {
            std::cerr << "input: invalid JSON: " << e.what() << "\n";
            return 2;
        }
    }

    try {
        qlat::api::json report = qlat::api::run_job(job, check_fast_path);
        if (format == "text")
            std::cout << qlat::api::render_text(report);
        else
            std::cout << report.dump(2) << "\n";
        return 0;
    } catch (const qlat::Error& e) {
        std::cerr << e.code << ": " << e.what() << "\n";
        return e.code == "Unsupported" ? 3 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
