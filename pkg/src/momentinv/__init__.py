"""3D geometric moment invariants built from sl2-module decompositions."""
