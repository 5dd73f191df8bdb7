"""Scene-pair mixing for discrete navigation data augmentation.

Cut two scenes at their highest-traffic doorway bridges, cross-connect
the halves, realign positions so junction headings match the originals,
mix the junction panoramas, and splice the supervised paths and
chunk-aligned instructions into new training triplets.
"""

from .centrality import (
    CentralityScores,
    brute_force_betweenness,
    edge_betweenness,
    vertex_betweenness,
)
from .dataset_io import (
    DatasetBundle,
    PairPlan,
    import_matterport_connectivity,
    load_bundle,
    load_cross_scene,
    load_scene,
    sample_pairs,
    save_bundle,
    save_cross_scene,
    save_scene,
    synth_generate,
)
from .eval_metrics import (
    ReplayResult,
    Violation,
    cls_score,
    dtw_distance,
    ndtw,
    replay,
    sdtw,
    spl,
    validate_triplet,
)
from .key_select import KeyEdge, candidate_key_edges, count_paths_through_edge, select_key_edge
from .nav_graph import (
    Panorama,
    Provenance,
    SceneGraph,
    Vertex,
    ViewCell,
    heading,
    is_bridge,
    make_scene,
    sector_index,
    side_component,
)
from .scene_mixup import (
    AlignmentRecord,
    CrossScene,
    KeyVertices,
    align_orientation,
    cross_connect,
    mix_panoramas,
)
from .splice import (
    AugmentedTriplet,
    Chunk,
    GenConfig,
    InstructionRecord,
    PathRecord,
    SplitDonor,
    TripletProvenance,
    cross_splice,
    generate_pair,
    split_at_key_edge,
    split_chunks,
)

__version__ = "0.1.0"
