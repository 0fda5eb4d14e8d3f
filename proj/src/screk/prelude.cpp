#include "grouptrack/screk/parser.hpp"

namespace grouptrack::screk {

namespace {

constexpr std::string_view prelude_text = R"(// Built-in object classes and the primitive models backed by evaluators.

class Mobile:Object {
  const false;
  CSPoint3D Position;
  CSPoint3D Size;
  CSDouble Speed;
  CSPoint3DList Trajectory;
}

class Group:Mobile {
  const false;
  CSInt NumberOfMobiles;
  CSDouble AverageDistMobiles;
}

class Zone:Object {
  const true;
  CSString Name;
  CSPoint3DList Vertices;
}

class Equipment:Object {
  const true;
  CSString Name;
  CSPoint3D Position;
}

PrimitiveState(Group_Stop,
  PhysicalObjects((g:Group)))

PrimitiveState(Group_Near_Equipment,
  PhysicalObjects((g:Group), (e:Equipment)))

PrimitiveState(Group_Stays_Inside_Zone,
  PhysicalObjects((g:Group), (z:Zone)))

PrimitiveState(Group_Outside_Zone,
  PhysicalObjects((g:Group), (z:Zone)))

PrimitiveState(Group_Lively,
  PhysicalObjects((g:Group)))

PrimitiveEvent(Group_Created,
  PhysicalObjects((g:Group)))

PrimitiveEvent(Group_Split,
  PhysicalObjects((g:Group)))

PrimitiveEvent(Group_Merge,
  PhysicalObjects((g:Group)))
)";

}  // namespace

std::string_view builtin_prelude_text() { return prelude_text; }

const Ontology& builtin_prelude() {
  static const Ontology prelude = parse_ontology(prelude_text, Ontology{});
  return prelude;
}

}  // namespace grouptrack::screk
