"""SpatialGrammar: a grid DSL for indoor scenes and building shells.

Programs describe objects on a bird's-eye-view grid; the compiler lowers
them to oriented 3D boxes, the validator reports collisions and support
violations, and the data engine turns templates into seeded training
corpora.
"""

from .errors import (
    ChainFailed,
    CompileError,
    CycleError,
    DanglingBlockError,
    InjectionFailed,
    LengthMismatch,
    OrphanOpeningError,
    ParseError,
    RaggedGridError,
    SpatialGrammarError,
    TemplateExhausted,
    UnknownRelation,
    UnsupportedFormat,
    VocabError,
)
from .geometry import GridSpec, OrientedBox, Vec3, grid_dimensions
from .vocab import Category, VocabEntry, Vocabulary, load_vocabulary
from .llmsli import (
    CellSpec,
    Face,
    GridBlock,
    SceneProgram,
    parse_llmsli,
    print_llmsli,
    program_hash,
    program_stats,
)
from .llmslb import (
    BuildingProgram,
    StructCell,
    StructSymbol,
    WallFace,
    check_closure,
    parse_llmslb,
    print_llmslb,
    wall_runs,
)
from .compiler import (
    CompiledScene,
    CompilerConfig,
    Opening,
    Placement,
    compile_building,
    compile_placement,
    compile_scene,
    compile_source,
    compose_frames,
)
from .export import canonical_json, export_scene, load_scene_json, scene_to_dict
from .validator import (
    ValidationReport,
    ValidatorConfig,
    check_bounds,
    check_collisions,
    check_support,
    collision_rate,
    obb_intersect,
    report_text,
    validate,
)
from .relations import RELATIONS, check_relation
from .drfr import (
    AtomicCheck,
    CheckKind,
    Checklist,
    DrfrResult,
    evaluate_check,
    evaluate_cumulative,
    evaluate_drfr,
    load_checklists,
)
from .templates import RelationRule, SceneTemplate, SurfaceRule, load_template
from .datagen import (
    DpoPair,
    SftSample,
    derive_subseed,
    extract_pretrain_corpus,
    extract_sft_pairs,
    generate_sft_dataset,
    sample_scene,
)
from .errorchain import (
    ErrorType,
    classify_failure,
    error_chain,
    generate_dpo_pairs,
    inject_error,
)

__version__ = "0.1.0"
