#include "lobhawkes/acceptance.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    lobhawkes::AcceptanceOptions options;
    CLI::App app{"Round-trip acceptance criteria"};
    app.add_option("--seed", options.seed, "Base seed")->capture_default_str();
    app.add_option("--tighten", options.tolerance_scale, "Tolerance scale factor")->capture_default_str();
    app.add_option("--threads", options.threads, "Worker threads")->capture_default_str();
    app.add_option("--only", options.only, "Criteria to run (1-8)");
    CLI11_PARSE(app, argc, argv);

    options.on_result = [](const lobhawkes::CriterionResult& r) {
        std::cout << lobhawkes::format_result(r) << std::endl;
    };
    try {
        return lobhawkes::run_acceptance(options).passed() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
