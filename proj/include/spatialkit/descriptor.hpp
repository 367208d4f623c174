#pragma once

#include <cstdint>
#include <string>

#include "spatialkit/coco.hpp"
#include "spatialkit/pairing.hpp"

namespace spatialkit {

struct DescribedObject {
  InstanceId instance_id = 0;
  CategoryId category_id = 0;
  std::string category_name;
  Rect bbox;
  friend bool operator==(const DescribedObject&, const DescribedObject&) = default;
};

/// (subject, box) <relation> (object, box): one surviving pair.
struct SpatialDescriptor {
  ImageId image_id = 0;
  std::uint32_t pair_index = 0;
  DescribedObject subject;
  RelationToken relation = RelationToken::and_;
  DescribedObject object;
  friend bool operator==(const SpatialDescriptor&, const SpatialDescriptor&) = default;
};

}  // namespace spatialkit
