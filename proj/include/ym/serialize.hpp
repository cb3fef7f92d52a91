#ifndef YM_SERIALIZE_HPP
#define YM_SERIALIZE_HPP

#include <string>

#include "json.hpp"
#include "ym/young.hpp"

namespace ym {

using json = nlohmann::json;

json to_json(const GridDomain& g);
GridDomain grid_from_json(const json& j);

json to_json(const BallGrid& b);
BallGrid ball_from_json(const json& j);

json to_json(const ScalarMeasure& m);
ScalarMeasure scalar_from_json(const json& j);

json to_json(const VectorMeasure& m);
VectorMeasure vector_from_json(const json& j);

json to_json(const TwoScaleYoungMeasure& ym);
TwoScaleYoungMeasure ym_from_json(const json& j);

json to_json(const YmDiff& d);

void save_json(const std::string& path, const json& j);
json load_json(const std::string& path);

}  // namespace ym

#endif
