"""Lorentzian comparison geometry on analytic and discrete (causal set) spaces.

Typical use::

    from lorlab import ModelConfig, Region, sprinkle, scan_global_bound

    space = sprinkle(Region.flat_diamond(hi=(4.0, 0.0)), 500, seed=1, include_tips=True)
    print(scan_global_bound(space, ModelConfig(0.0), triangles=200).failures)
"""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .model_space import (  # noqa: E402
    CausalTriple,
    Hinge,
    ModelConfig,
    TriangleSides,
    angle_from_sides,
    comparison_point_distance,
    finite_diameter,
    side_from_hinge,
    vertex_angle,
)
from .spaces import AnalyticSpace, DiscreteSpace, Region, RealiserChain, load_space, save_space, sprinkle  # noqa: E402
from .null_distance import (  # noqa: E402
    NullDistance,
    check_piecewise_connectivity,
    coordinate_time,
    diamond_diameter,
    export_csv,
    null_distance,
)
from .comparison import (  # noqa: E402
    ComparisonEntry,
    ComparisonReport,
    TriangleInstance,
    angle_triangle_inequality_check,
    check_angle_condition,
    check_hinge_condition,
    check_triangle_condition,
    comparison_angle,
    make_triangle,
    measure_angle,
    verify_alexandrov_future,
)
from .globalisation import (  # noqa: E402
    DiamondCover,
    bonnet_myers_check,
    cats_cradle,
    diameter_refinement,
    gluing_subdivide,
    greedy_cover,
    lebesgue_number,
    locate_positive_failure,
    scan_global_bound,
)
from .gh import BoundedLorentzianSpace, diamond_to_bounded, gh_distance, stability_experiment  # noqa: E402
