"""config.py

MutDet runtime settings and run configuration parsing.
"""

from typing import Mapping, Any, Tuple, NamedTuple, Dict
import os

from marshmallow import Schema, fields, validate, post_load, ValidationError

from mutdet.exceptions import ConfigurationError


class MutDetSettings(NamedTuple):
    """Contains all process-wide runtime settings."""
    #: Default log level (debug, info, warning, error, critical)
    LOGLEVEL: str = 'warning'

    #: Log wall-clock timings of traced sections at debug level
    PROFILE: bool = False

    #: Size of the frozen-feature in-memory cache in bytes
    FEATURE_CACHE_SIZE: int = 1024 * 1024 * 64  # 64 MB

    #: Compression level of the frozen-feature cache, from 0-9
    FEATURE_CACHE_COMPRESS_LEVEL: int = 1

    #: Compression level of written PNG scenes, from 0-9
    PNG_COMPRESS_LEVEL: int = 1

    #: Number of training iterations between two log lines
    LOG_EVERY: int = 1


AVAILABLE_SETTINGS: Tuple[str, ...] = tuple(MutDetSettings._fields)


class SettingSchema(Schema):
    """Schema used to create and validate MutDetSettings objects"""
    LOGLEVEL = fields.String(
        validate=validate.OneOf(['debug', 'info', 'warning', 'error', 'critical'])
    )
    PROFILE = fields.Boolean()

    FEATURE_CACHE_SIZE = fields.Integer(validate=validate.Range(min=0))
    FEATURE_CACHE_COMPRESS_LEVEL = fields.Integer(validate=validate.Range(min=0, max=9))
    PNG_COMPRESS_LEVEL = fields.Integer(validate=validate.Range(min=0, max=9))

    LOG_EVERY = fields.Integer(validate=validate.Range(min=1))

    @post_load
    def make_settings(self, data: Dict[str, Any], **kwargs: Any) -> MutDetSettings:
        return MutDetSettings(**data)


def parse_config(config: Mapping[str, Any] = None) -> MutDetSettings:
    """Parse given config dict and return new MutDetSettings object"""
    config_dict = dict(config or {})

    for setting in AVAILABLE_SETTINGS:
        env_setting = f'MUTDET_{setting}'
        if setting not in config_dict and env_setting in os.environ:
            config_dict[setting] = os.environ[env_setting]

    schema = SettingSchema()
    try:
        new_settings = schema.load(config_dict)
    except ValidationError as exc:
        raise ValueError('Could not parse configuration') from exc

    return new_settings


CALIBRATION_MODES = ('none', 'encoder-distill', 'decoder-distill', 'siamese')
EMBEDDING_LOSSES = ('contrastive', 'l1')


class DetectorConfig(NamedTuple):
    """Architecture of the desk-scale detector and its pre-training graph."""
    #: Feature width C
    dim: int = 32

    #: Number of object queries N
    num_queries: int = 20

    #: Number of pseudo-label clusters K_cls
    num_classes: int = 16

    #: Number of one-degree angle bins
    angle_bins: int = 180

    #: Attention heads per block (0 derives dim / 32, at least 1)
    num_heads: int = 0

    encoder_layers: int = 1
    decoder_layers: int = 2
    enhancement_layers: int = 3

    #: none, encoder-distill, decoder-distill or siamese
    calibration_mode: str = 'siamese'

    #: Run the mutual enhancement module (off means identity bypass)
    enhance: bool = True

    #: Side length of the square input images in pixels
    image_size: int = 64

    #: Patch sizes of the frozen extractor, one token scale each
    patch_sizes: Tuple[int, ...] = (8, 16)

    #: Seed of the frozen extractor weights
    backbone_seed: int = 1234

    #: Seed decoder queries and reference boxes from the top-N encoder proposals
    two_stage_queries: bool = True

    #: Apply detection losses at every decoder layer instead of the last one only
    deep_supervision: bool = True

    #: Embedding alignment objective, contrastive or l1
    embedding_loss: str = 'contrastive'

    #: Align predictions to enhanced embeddings (off aligns to the raw embeddings)
    enhanced_embeddings: bool = True

    #: Decoder consumes enhanced features (off feeds the un-enhanced features)
    enhanced_features: bool = True

    #: Include the encoder-proposal term of the detector alignment loss
    encoder_alignment: bool = True

    @property
    def heads(self) -> int:
        if self.num_heads > 0:
            return self.num_heads
        return max(1, self.dim // 32)

    @property
    def num_tokens(self) -> int:
        return sum((self.image_size // p) ** 2 for p in self.patch_sizes)


class TrainConfig(NamedTuple):
    """Optimization schedule and loss hyperparameters."""
    seed: int = 0
    epochs: int = 20
    batch_size: int = 4
    learning_rate: float = 1e-4
    lr_decay_epoch: int = 18
    lr_decay_factor: float = 0.1
    warmup_iters: int = 50
    weight_decay: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    #: Contrastive temperature
    temperature: float = 0.2

    #: Epochs between intermediate checkpoints (0 writes the final one only)
    checkpoint_every: int = 0

    #: Matcher cost weights; l1 and giou also weight the regression loss
    weight_class: float = 2.0
    weight_l1: float = 5.0
    weight_giou: float = 2.0
    weight_angle: float = 0.5

    focal_alpha: float = 0.25
    focal_gamma: float = 2.0

    #: Standard deviation and truncation radius of the circular angle label, in bins
    csl_sigma: float = 4.0
    csl_radius: int = 12


_positive_int = validate.Range(min=1)
_non_negative_int = validate.Range(min=0)
_positive_float = validate.Range(min=0, min_inclusive=False)
_unit_interval = validate.Range(min=0, max=1, max_inclusive=False)


class DetectorConfigSchema(Schema):
    """Schema used to create and validate DetectorConfig objects"""
    dim = fields.Integer(validate=_positive_int)
    num_queries = fields.Integer(validate=_positive_int)
    num_classes = fields.Integer(validate=_positive_int)
    angle_bins = fields.Integer(validate=validate.Range(min=2))
    num_heads = fields.Integer(validate=_non_negative_int)
    encoder_layers = fields.Integer(validate=_non_negative_int)
    decoder_layers = fields.Integer(validate=_positive_int)
    enhancement_layers = fields.Integer(validate=_positive_int)
    calibration_mode = fields.String(validate=validate.OneOf(CALIBRATION_MODES))
    enhance = fields.Boolean()
    image_size = fields.Integer(validate=_positive_int)
    patch_sizes = fields.List(fields.Integer(validate=_positive_int),
                              validate=validate.Length(min=1))
    backbone_seed = fields.Integer(validate=_non_negative_int)
    two_stage_queries = fields.Boolean()
    deep_supervision = fields.Boolean()
    embedding_loss = fields.String(validate=validate.OneOf(EMBEDDING_LOSSES))
    enhanced_embeddings = fields.Boolean()
    enhanced_features = fields.Boolean()
    encoder_alignment = fields.Boolean()

    @post_load
    def make_config(self, data: Dict[str, Any], **kwargs: Any) -> DetectorConfig:
        if 'patch_sizes' in data:
            data['patch_sizes'] = tuple(data['patch_sizes'])
        return DetectorConfig(**data)


class TrainConfigSchema(Schema):
    """Schema used to create and validate TrainConfig objects"""
    seed = fields.Integer(validate=_non_negative_int)
    epochs = fields.Integer(validate=_positive_int)
    batch_size = fields.Integer(validate=_positive_int)
    learning_rate = fields.Float(validate=_positive_float)
    lr_decay_epoch = fields.Integer(validate=_non_negative_int)
    lr_decay_factor = fields.Float(validate=validate.Range(min=0, max=1, min_inclusive=False))
    warmup_iters = fields.Integer(validate=_non_negative_int)
    weight_decay = fields.Float(validate=validate.Range(min=0))
    beta1 = fields.Float(validate=_unit_interval)
    beta2 = fields.Float(validate=_unit_interval)
    adam_eps = fields.Float(validate=_positive_float)
    temperature = fields.Float(validate=_positive_float)
    checkpoint_every = fields.Integer(validate=_non_negative_int)
    weight_class = fields.Float(validate=validate.Range(min=0))
    weight_l1 = fields.Float(validate=validate.Range(min=0))
    weight_giou = fields.Float(validate=validate.Range(min=0))
    weight_angle = fields.Float(validate=validate.Range(min=0))
    focal_alpha = fields.Float(validate=validate.Range(min=0, max=1))
    focal_gamma = fields.Float(validate=validate.Range(min=0))
    csl_sigma = fields.Float(validate=_positive_float)
    csl_radius = fields.Integer(validate=_non_negative_int)

    @post_load
    def make_config(self, data: Dict[str, Any], **kwargs: Any) -> TrainConfig:
        return TrainConfig(**data)


def check_detector_config(config: DetectorConfig) -> DetectorConfig:
    """Cross-field checks that a single schema field cannot express"""
    if config.dim % config.heads:
        raise ConfigurationError(
            f'Feature width {config.dim} is not divisible by {config.heads} attention heads'
        )
    if config.dim % 4:
        raise ConfigurationError('Feature width must be divisible by 4 for 2D position encodings')
    for patch_size in config.patch_sizes:
        if config.image_size % patch_size:
            raise ConfigurationError(
                f'Image size {config.image_size} is not divisible by patch size {patch_size}'
            )
    if config.num_queries > config.num_tokens:
        raise ConfigurationError(
            f'Cannot select {config.num_queries} proposals from {config.num_tokens} tokens'
        )
    return config


def check_train_config(config: TrainConfig) -> TrainConfig:
    if config.lr_decay_epoch > config.epochs:
        raise ConfigurationError(
            f'Decay epoch {config.lr_decay_epoch} lies beyond the last epoch {config.epochs}'
        )
    return config


def parse_run_config(config: Mapping[str, Any] = None) -> Tuple[DetectorConfig, TrainConfig]:
    """Split a flat key-value mapping into validated detector and training configs.

    Example:

        >>> detector_config, train_config = parse_run_config({'dim': 16, 'epochs': 5,
        ...                                                   'lr_decay_epoch': 4})
        >>> detector_config.dim, train_config.epochs
        (16, 5)

    """
    config_dict = dict(config or {})

    detector_keys = set(DetectorConfig._fields)
    train_keys = set(TrainConfig._fields)

    unknown_keys = set(config_dict) - detector_keys - train_keys
    if unknown_keys:
        raise ConfigurationError(f'Unknown configuration keys: {", ".join(sorted(unknown_keys))}')

    try:
        detector_config = DetectorConfigSchema().load(
            {k: v for k, v in config_dict.items() if k in detector_keys}
        )
        train_config = TrainConfigSchema().load(
            {k: v for k, v in config_dict.items() if k in train_keys}
        )
    except ValidationError as exc:
        raise ConfigurationError(f'Invalid configuration: {exc.messages}') from exc

    return check_detector_config(detector_config), check_train_config(train_config)


def load_run_config(path: str) -> Tuple[DetectorConfig, TrainConfig]:
    """Read a flat ``key = value`` TOML file and parse it"""
    import toml

    try:
        config_dict = dict(toml.load(path))
    except toml.TomlDecodeError as exc:
        raise ConfigurationError(f'Could not parse config file {path}: {exc!s}') from exc

    nested = [key for key, value in config_dict.items() if isinstance(value, dict)]
    if nested:
        raise ConfigurationError(f'Config file must be flat, found tables: {", ".join(nested)}')

    return parse_run_config(config_dict)
