#pragma once

#include <string>
#include <vector>

namespace istn::cli {

struct Recipe {
    std::string name;
    std::string text;
};

std::vector<Recipe> const& recipes();

}  // namespace istn::cli
