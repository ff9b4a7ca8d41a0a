"""Local editing of layer-wise generator output via feature-map surgery.

Public surface: generator backbone, masks and priorities, modulation
operators, layout parsing, the object bank, edit-script composition,
sessions, and the HTTP service factory.
"""

from .bank import (ObjectAsset, ObjectBank, PoseClusterModel, RotationPath,
                   cluster_poses, extract_object, load_bank, persist_bank,
                   rotation_path, transform_asset)
from .composer import (EDIT_SCRIPT_SCHEMA, EditPlan, apply_edit,
                       apply_global_style, attach_segmentation, execute_plan,
                       parse_edit_script, recommended_layer, replay_log,
                       serialize_plan)
from .errors import (AdapterFormatError, ConfigError, ContractError,
                     CorruptionError, LayoutIncompleteError, LoganError,
                     ManifestVersionError, NumericError, ScriptParseError,
                     UnknownObjectError)
from .layout import (BackgroundFill, Layout, SegmentationMap,
                     build_background_fill, clear_room, load_segmentation,
                     parse_layout, rasterize_layout, save_segmentation)
from .masks import (DEFAULT_PRIORITIES, PriorityAssignment, area_downsample,
                    assign_priority, load_mask_png, resample_mask,
                    resolve_priority_masks, save_mask_png, upsample_nearest,
                    validate_mask)
from .model import (ADAIN_EPS, FeatureMap, GeneratorModel, LatentCode,
                    StyleParams, adain, instantiate_model, parse_model_ref,
                    toy_resolution)
from .modulation import RegionPatch, blend_masked, cmod, smod
from .service import ERROR_CODES, create_app
from .session import ScheduledAction, Session

__version__ = "0.1.0"

__all__ = [
    "ADAIN_EPS", "AdapterFormatError", "BackgroundFill", "ConfigError",
    "ContractError", "CorruptionError", "DEFAULT_PRIORITIES",
    "EDIT_SCRIPT_SCHEMA", "ERROR_CODES", "EditPlan", "FeatureMap",
    "GeneratorModel", "LatentCode", "Layout", "LayoutIncompleteError",
    "LoganError", "ManifestVersionError", "NumericError", "ObjectAsset",
    "ObjectBank", "PoseClusterModel", "PriorityAssignment", "RegionPatch",
    "RotationPath", "ScheduledAction", "ScriptParseError", "SegmentationMap",
    "Session", "StyleParams", "UnknownObjectError", "adain", "apply_edit",
    "apply_global_style", "area_downsample", "assign_priority",
    "attach_segmentation", "blend_masked", "build_background_fill",
    "clear_room", "cluster_poses", "cmod", "create_app", "execute_plan",
    "extract_object", "instantiate_model", "load_bank", "load_mask_png",
    "load_segmentation", "parse_edit_script", "parse_layout",
    "parse_model_ref", "persist_bank", "rasterize_layout",
    "recommended_layer", "replay_log", "resample_mask",
    "resolve_priority_masks", "rotation_path", "save_mask_png",
    "save_segmentation", "serialize_plan", "smod", "toy_resolution",
    "transform_asset", "upsample_nearest", "validate_mask",
]
