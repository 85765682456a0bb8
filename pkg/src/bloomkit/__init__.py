"""Continuous blooming of convex polyhedron unfoldings."""
from .blooming import (HingeStructure, Move, Pose, Schedule, epsilon_bound, pick_epsilon_delta, pose_at,
                       schedule_path_two_step, schedule_path_unroll, schedule_path_waltz, schedule_tree_unroll)
from .errors import *  # noqa: F401,F403
from .geodesics import (CutLocus, DistanceMap, GeodesicPath, cut_locus, geodesic_distance, grown_polyhedron,
                        shortest_path, source_unfolding)
from .geometry import Plane, Polyhedron, RigidTransform, build_convex_polyhedron, halfspace_intersection
from .unfolding import Unfolding, develop, dual_path, faces_from_cuts, refine_to_serpentine
from .verify import VerificationReport, classify_pose, run_lemma_suite, verify_schedule

__version__ = "0.1.0"
