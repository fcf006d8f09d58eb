// Regenerates the bundled synthetic Milan-like dataset (1,000 listings over
// 88 rectangular strata). Deterministic: the same seed reproduces the
// checked-in fixture files byte for byte.
#include <cstdint>
#include <iostream>
#include <string>

#include "spatialps/errors.hpp"
#include "spatialps/io.hpp"
#include "spatialps/numfmt.hpp"

int main(int argc, char** argv) {
    std::string listings = "milan_listings.csv";
    std::string strata = "milan_strata.json";
    std::uint64_t seed = 20250801;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        const auto next = [&]() -> std::string {
            if (i + 1 >= argc) throw spatialps::data_error(arg + " needs a value");
            return argv[++i];
        };
        try {
            if (arg == "--listings")
                listings = next();
            else if (arg == "--strata")
                strata = next();
            else if (arg == "--seed")
                seed = static_cast<std::uint64_t>(spatialps::parse_long(next(), "--seed"));
            else {
                std::cerr << "usage: make_milan_fixture [--listings PATH] [--strata PATH] [--seed N]\n";
                return arg == "--help" ? 0 : 1;
            }
        } catch (const spatialps::data_error& e) {
            std::cerr << "data error: " << e.what() << "\n";
            return 2;
        }
    }
    try {
        spatialps::write_synthetic_milan(listings, strata, seed);
    } catch (const spatialps::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    std::cout << "wrote " << listings << " and " << strata << "\n";
    return 0;
}
