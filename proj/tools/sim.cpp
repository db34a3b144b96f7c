// sim run <config> | sim sweep <config> --kappas=... | sim mms <config>

#include "cfphase/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

std::vector<double> parse_kappas(const std::string& text)
{
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        out.push_back(std::stod(item));
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Regularized order-parameter solver with elasticity coupling"};
    app.require_subcommand(1);

    std::string config_path, kappas_text, output_dir;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "flat key = value configuration file")
            ->required();
        sub->add_option("-o,--output-dir", output_dir, "overrides output_dir from the config");
    };
    auto* run = app.add_subcommand("run", "integrate one configuration");
    add_common(run);
    auto* sweep = app.add_subcommand("sweep", "run a decreasing list of kappa values");
    add_common(sweep);
    sweep->add_option("--kappas", kappas_text, "comma-separated, strictly decreasing");
    auto* mms = app.add_subcommand("mms", "manufactured-solution order report");
    add_common(mms);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cfphase::kExitOk : cfphase::kExitUsage;
    }

    cfphase::RunConfig config;
    try {
        config = cfphase::load_config(config_path);
    } catch (const cfphase::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return cfphase::kExitUsage;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cfphase::kExitIo;
    }
    if (!output_dir.empty()) {
        config.output_dir = output_dir;
        for (auto& [k, v] : config.echo)
            if (k == "output_dir")
                v = output_dir;
    }

    if (run->parsed())
        return cfphase::run_command(config, std::cerr);
    if (mms->parsed())
        return cfphase::mms_command(config, std::cerr);

    std::vector<double> kappas = config.kappas;
    if (!kappas_text.empty()) {
        try {
            kappas = parse_kappas(kappas_text);
        } catch (const std::exception&) {
            std::cerr << "error: --kappas expects comma-separated numbers, got '" << kappas_text
                      << "'\n";
            return cfphase::kExitUsage;
        }
    }
    return cfphase::sweep_command(config, kappas, std::cerr);
}
