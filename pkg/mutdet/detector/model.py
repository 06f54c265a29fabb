"""detector/model.py

The MutDet pre-training graph around a desk-scale two-stage detector.
"""

from typing import List, NamedTuple, Optional
import logging

import numpy as np

from mutdet.config import DetectorConfig, check_detector_config
from mutdet.detector.backbone import FrozenBackbone
from mutdet.detector.heads import BranchOutput, PredictionHeads
from mutdet.detector.transformer import Decoder, Encoder, multiscale_positions
from mutdet.enhancement import MutualEnhancement
from mutdet.exceptions import ConfigurationError
from mutdet.labels.store import PseudoLabelSet
from mutdet.losses.matching import MatchAssignment
from mutdet.nn.functional import l2_normalize_rows, logit
from mutdet.nn.layers import Linear
from mutdet.nn.params import ParamStore
from mutdet.nn.tensor import ArrayLike, Tensor, as_tensor
from mutdet.profile import trace

logger = logging.getLogger(__name__)

#: Branches that run the decoder a second time on the un-enhanced features
AUX_BRANCH_MODES = ('siamese', 'decoder-distill')


class Proposals(NamedTuple):
    #: Token indices of the selected proposals, in rank order
    indices: np.ndarray
    output: BranchOutput


class QuerySet(NamedTuple):
    #: N x C decoder input
    content: Tensor
    #: N x 4 box logits the decoder refines; None for free-standing boxes
    reference: Optional[Tensor]


class PretrainOutput(NamedTuple):
    #: Top-N encoder proposals of the decoder memory
    encoder: Proposals
    #: Per-layer predictions decoded from the enhanced features
    main: List[BranchOutput]
    #: Per-layer predictions of the same decoder run on F, if the mode uses them
    aux: Optional[List[BranchOutput]]
    #: Alignment targets (enhanced object embeddings re-normalized, or the raw ones), M x C
    objects: Tensor
    features: Tensor
    enhanced_features: Tensor


def select_top(scores: np.ndarray, count: int) -> np.ndarray:
    """Indices of the ``count`` highest scores, ties resolved by lower index"""
    scores = np.asarray(scores, dtype=np.float64)
    if count > len(scores):
        raise ConfigurationError(f'Cannot select {count} proposals from {len(scores)} tokens')
    return np.argsort(-scores, kind='stable')[:count]


class MutDet:
    """Detector plus mutual enhancement module, with all trainable weights in one store.

    Example:

        >>> from mutdet.config import DetectorConfig
        >>> model = MutDet(DetectorConfig(dim=32, num_queries=5))
        >>> len(model.finetune_forward(np.zeros((64, 64, 3))))
        2

    """

    def __init__(self, config: DetectorConfig, seed: int = 0,
                 backbone: Optional[FrozenBackbone] = None) -> None:
        self.config = check_detector_config(config)
        self.seed = seed
        self.backbone = backbone or FrozenBackbone(config)
        self.store = ParamStore()

        rng = np.random.default_rng(seed)
        dim = config.dim

        self.positions = multiscale_positions(self.backbone.token_positions(), dim)
        self.anchor_logits = logit(self.backbone.token_anchors())
        self.encoder = Encoder(self.store, 'encoder', config, rng)
        self.encoder_heads = PredictionHeads(self.store, 'encoder.heads', config, rng)

        self.decoder = Decoder(self.store, 'decoder', config, rng)
        # proposal tokens carry most of the query content in two-stage mode
        query_scale = 0.1 if config.two_stage_queries else 1.0
        self.store.add('decoder.queries',
                       rng.normal(0, query_scale, size=(config.num_queries, dim)))
        self.query_projection: Optional[Linear] = None
        if config.two_stage_queries:
            self.query_projection = Linear(self.store, 'decoder.query_proj', dim, dim, rng)

        self.enhancement: Optional[MutualEnhancement] = None
        if config.enhance:
            self.enhancement = MutualEnhancement(
                self.store, dim, config.heads, config.enhancement_layers, rng
            )

        logger.debug('Created MutDet with %d trainable parameters', self.store.size)

    def encode(self, image: np.ndarray, image_id: Optional[str] = None) -> Tensor:
        """``F`` of one image: frozen tokens, positional encodings, encoder layers"""
        tokens = self.backbone.tokens(image, image_id)
        return self.encoder(tokens, self.positions)

    def encoder_proposals(self, features: ArrayLike) -> Proposals:
        """Heads over every token, boxes relative to the token anchors; the top
        N by maximum class logit in rank order"""
        output = self.encoder_heads(features, self.anchor_logits)
        indices = select_top(output.class_logits.data.max(axis=1), self.config.num_queries)
        return Proposals(indices, output.take(indices))

    def queries(self, memory: Tensor, proposals: Optional[Proposals] = None) -> QuerySet:
        """Learned queries, or with two-stage queries the learned queries plus
        the projected proposal tokens, refining the proposal boxes"""
        learned = self.store['decoder.queries']
        if self.query_projection is None:
            return QuerySet(learned, None)
        if proposals is None:
            proposals = self.encoder_proposals(memory)
        content = learned + self.query_projection(memory[proposals.indices])
        return QuerySet(content, proposals.output.box_logits)

    def object_embeddings(self, labels: PseudoLabelSet) -> Tensor:
        embeddings = labels.embeddings(self.config.dim)
        if embeddings.shape[1] != self.config.dim:
            raise ConfigurationError(
                f'Pseudo-label embeddings have width {embeddings.shape[1]}, '
                f'the detector expects {self.config.dim}'
            )
        return Tensor(embeddings)

    @trace('pretrain_forward')
    def pretrain_forward(self, image: np.ndarray, labels: PseudoLabelSet,
                         image_id: Optional[str] = None) -> PretrainOutput:
        config = self.config
        features = self.encode(image, image_id)
        objects = self.object_embeddings(labels)

        if self.enhancement is not None:
            enhanced_objects, enhanced_features = self.enhancement(objects, features)
        else:
            enhanced_objects, enhanced_features = objects, features

        memory = enhanced_features if config.enhanced_features else features
        proposals = self.encoder_proposals(memory)
        queries = self.queries(memory, proposals)

        main = self.decoder(memory, queries.content, queries.reference)
        aux = None
        if config.calibration_mode in AUX_BRANCH_MODES:
            if queries.reference is not None and memory is not features:
                # proposals of F, exactly as in the fine-tuning graph
                queries = self.queries(features)
            aux = self.decoder(features, queries.content, queries.reference)

        if config.enhanced_embeddings and self.enhancement is not None:
            targets = l2_normalize_rows(enhanced_objects)
        else:
            targets = objects

        return PretrainOutput(proposals, main, aux, targets, features, enhanced_features)

    @trace('finetune_forward')
    def finetune_forward(self, image: np.ndarray,
                         image_id: Optional[str] = None) -> List[BranchOutput]:
        """Deployment graph: the decoder consumes ``F`` directly, no object embeddings"""
        features = self.encode(image, image_id)
        queries = self.queries(features)
        return self.decoder(features, queries.content, queries.reference)


def feature_discrepancy(embeddings: ArrayLike, objects: ArrayLike,
                        assignment: MatchAssignment, eps: float = 1e-12) -> Optional[float]:
    """Mean cosine similarity of matched (prediction, object) pairs; None without pairs.

    Zero rows have similarity 0 with everything.
    """
    if not assignment.num_matched:
        return None

    z = as_tensor(embeddings).data[assignment.prediction_indices]
    o = as_tensor(objects).data[assignment.annotation_indices]
    norms = np.sqrt((z * z).sum(axis=1) + eps) * np.sqrt((o * o).sum(axis=1) + eps)
    cosine = np.einsum('ij,ij->i', z, o) / norms
    return float(np.clip(cosine.mean(), -1.0, 1.0))
