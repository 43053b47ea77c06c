"""The active-monitoring state machine.

One session owns a classifier copy, a monitoring strategy, the growing
labeled dataset, and the run statistics. Processing one input:

  classify -> observe the feature layer -> monitor verdict
  -> on warning (budget permitting): ask the authority, collect the label,
     update statistics, and decide between continuing, adapting the
     monitor (false warning, precision below kappa*), or adapting the
     model (enough samples of a novel class, or network precision below
     tau*).

Model adaptation extends the network head by transfer surgery and rebuilds
the monitor from scratch over the grown dataset; monitor adaptation
re-fits the warned class's clusters and raises its distance threshold.

Everything is deterministic under (dataset, config, seed): all randomness
flows from seeded generators and event timestamps are logical.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, replace as dataclass_replace

import numpy as np

from . import monitors, network as net_mod, reporting
from .authority import Authority, AuthorityQuery, OracleAuthority
from .config import RunConfig
from .data import (
    Dataset,
    StreamSpec,
    make_synthetic_blobs,
    load_csv,
    load_idx,
    phased_stream,
    shuffle_stream,
    split_known_unknown,
)
from .errors import EmptyDataset, InsufficientData, StreamExhausted
from .monitors import MonitorStats, QuantitativeMonitor, Verdict
from .network import Network, NetworkArch, Prediction, TrainConfig
from .reporting import Event, make_event

# evaluation pool routing: every Nth collected sample is held out from
# network retraining and used to measure s_network
EVAL_POOL_STRIDE = 5
MIN_EVAL_POOL = 20

DECISION_ADAPT_MODEL = "AdaptModel"
DECISION_ADAPT_MONITOR = "AdaptMonitor"
DECISION_CONTINUE = "Continue"


def _derive(seed: int, *salts: int) -> int:
    return int(np.random.SeedSequence([seed, *salts]).generate_state(1)[0])


@dataclass(frozen=True)
class Hyperparameters:
    tau_star: float | None  # model performance threshold; None disables B.2
    n_star: int  # samples of a novel class needed for adaptation
    kappa_star: float  # monitor precision threshold
    budget_fraction: float
    batch_size: int
    n_star_fraction: float


@dataclass
class RunStats:
    budget: int
    queries_used: int = 0
    s_samples: dict[int, int] = field(default_factory=dict)  # original class id -> count
    monitor_cumulative: MonitorStats = field(default_factory=MonitorStats)
    monitor_window: MonitorStats = field(default_factory=MonitorStats)
    collected_since_retrain: int = 0
    model_adaptations: int = 0
    monitor_adaptations: int = 0


@dataclass
class CollectedSample:
    pixels: np.ndarray
    label: int  # original vocabulary
    in_eval_pool: bool


class Strategy:
    """Monitoring strategy: verdict dispatch plus adaptation capabilities."""

    name: str = ""
    uses_cluster_monitor = False
    adapts_monitor = False

    def verdict(self, prediction: Prediction) -> Verdict:
        raise NotImplementedError


class QuantitativeStrategy(Strategy):
    name = "quantitative"
    uses_cluster_monitor = True
    adapts_monitor = True

    def __init__(self, monitor: QuantitativeMonitor):
        self.monitor = monitor

    def verdict(self, prediction: Prediction) -> Verdict:
        return monitors.verdict_quantitative(self.monitor, prediction)


class BoxStrategy(Strategy):
    name = "box"
    uses_cluster_monitor = True
    adapts_monitor = False

    def __init__(self, monitor: QuantitativeMonitor):
        self.monitor = monitor

    def verdict(self, prediction: Prediction) -> Verdict:
        return monitors.verdict_box(self.monitor, prediction)


class SoftmaxStrategy(Strategy):
    name = "softmax"

    def __init__(self, threshold: float):
        self.threshold = threshold

    def verdict(self, prediction: Prediction) -> Verdict:
        return monitors.verdict_softmax(prediction, self.threshold)


class RandomStrategy(Strategy):
    name = "random"

    def __init__(self, rate: float, rng: np.random.Generator):
        self.rate = rate
        self.rng = rng

    def verdict(self, prediction: Prediction) -> Verdict:
        return monitors.verdict_random(self.rate, self.rng)


def build_monitor(
    network: Network,
    dataset: Dataset,
    config: RunConfig,
    seed: int,
) -> tuple[QuantitativeMonitor, list[int]]:
    """Fresh monitor over a dense-labeled dataset; thresholds start at 1."""
    if len(dataset) == 0:
        raise EmptyDataset("cannot build a monitor from an empty dataset")
    classes = sorted(int(c) for c in np.unique(dataset.labels))
    valuations = {}
    for c in classes:
        pixels = dataset.pixels[dataset.labels == c]
        valuations[c] = net_mod.observe_features(network, pixels)
    monitor = monitors.build_monitor_from_valuations(
        valuations,
        variance_target=config.variance_target,
        k_max=config.k_max,
        seed=seed,
        use_pca=config.use_pca,
    )
    return monitor, classes


def decide(
    unknown_sample_counts: dict[int, int],
    n_star: int,
    s_network: float | None,
    tau_star: float | None,
    last_answer_fp: bool,
    window_precision: float | None,
    kappa_star: float,
    monitor_adaptive: bool,
) -> str:
    """The evaluate decision after an authority answer."""
    if any(count >= n_star for count in unknown_sample_counts.values()):
        return DECISION_ADAPT_MODEL
    if tau_star is not None and s_network is not None and s_network < tau_star:
        return DECISION_ADAPT_MODEL
    if (
        last_answer_fp
        and monitor_adaptive
        and window_precision is not None
        and window_precision < kappa_star
    ):
        return DECISION_ADAPT_MONITOR
    return DECISION_CONTINUE


@dataclass
class StepResult:
    emitted_class: int  # original vocabulary
    warned: bool
    queried: bool
    answer_class: int | None = None


class Session:
    """Owner of all mutable run state; exactly one step executes at a time."""

    MODE_MONITORING = "monitoring"
    MODE_ADAPTING_MONITOR = "adapting_monitor"
    MODE_ADAPTING_MODEL = "adapting_model"

    def __init__(
        self,
        config: RunConfig,
        stream: StreamSpec,
        original_network: Network,
        strategy: Strategy,
        base_pixels: np.ndarray,
        base_labels: np.ndarray,  # original vocabulary
        vocabulary: list[int],  # dense index -> original class id
        class_names: tuple[str, ...],
        hyper: Hyperparameters,
        authority: Authority,
    ):
        self.config = config
        self.stream = stream
        self.original_network = original_network
        self.network = original_network
        self.strategy = strategy
        self.base_pixels = base_pixels
        self.base_labels = base_labels
        self.vocabulary = list(vocabulary)
        self.class_names = class_names
        self.hyper = hyper
        self.authority = authority

        self.stats = RunStats(budget=math.ceil(hyper.budget_fraction * len(stream)))
        self.collected: list[CollectedSample] = []
        self.cursor = 0
        self.mode = self.MODE_MONITORING
        self.events: list[Event] = []
        self.metrics_rows: list[str] = []
        self.batch_index = 0
        self.test_dataset: Dataset | None = None  # original labels, all classes
        self._seq = 0
        self._query_counter = 0
        self._last_fp: tuple[int, float | None] | None = None
        self._pending_batch_events: list[str] = []

    # --- vocabulary helpers ---

    def dense_of(self, original: int) -> int:
        return self.vocabulary.index(original)

    def original_of(self, dense: int) -> int:
        return self.vocabulary[dense]

    def class_name(self, original: int) -> str:
        if 0 <= original < len(self.class_names):
            return self.class_names[original]
        return str(original)

    # --- event log ---

    def log(self, kind: str, **payload) -> Event:
        event = make_event(self._seq, self.cursor, kind, **payload)
        self._seq += 1
        self.events.append(event)
        if kind in (reporting.ADAPT_MODEL, reporting.ADAPT_MONITOR):
            self._pending_batch_events.append(kind)
        return event

    # --- dataset views ---

    def class_pixels(self, original: int) -> np.ndarray:
        """All of X for one class: base rows plus every collected row."""
        rows = [self.base_pixels[self.base_labels == original]]
        extra = [s.pixels for s in self.collected if s.label == original]
        if extra:
            rows.append(np.array(extra))
        return np.vstack([r for r in rows if len(r)])

    def monitor_dataset(self) -> Dataset:
        """Dense-labeled view of all of X over the current vocabulary."""
        pixels = [self.base_pixels]
        labels = [np.array([self.dense_of(l) for l in self.base_labels], dtype=np.int64)]
        known = set(self.vocabulary)
        for s in self.collected:
            if s.label in known:
                pixels.append(s.pixels[None, :])
                labels.append(np.array([self.dense_of(s.label)], dtype=np.int64))
        return self._dense_dataset(np.vstack(pixels), np.concatenate(labels))

    def retrain_dataset(self) -> Dataset:
        """Like monitor_dataset but excluding the current evaluation pool."""
        pixels = [self.base_pixels]
        labels = [np.array([self.dense_of(l) for l in self.base_labels], dtype=np.int64)]
        known = set(self.vocabulary)
        for s in self.collected:
            if s.label in known and not s.in_eval_pool:
                pixels.append(s.pixels[None, :])
                labels.append(np.array([self.dense_of(s.label)], dtype=np.int64))
        return self._dense_dataset(np.vstack(pixels), np.concatenate(labels))

    def _dense_dataset(self, pixels: np.ndarray, labels: np.ndarray) -> Dataset:
        ds = self.stream.dataset
        names = tuple(self.class_name(c) for c in self.vocabulary)
        return Dataset(pixels, labels, ds.width, ds.height, ds.channels, names)

    def eval_pool(self) -> list[CollectedSample]:
        return [s for s in self.collected if s.in_eval_pool]

    def s_network(self) -> float | None:
        """Network precision on the post-retraining evaluation pool."""
        pool = self.eval_pool()
        if len(pool) < MIN_EVAL_POOL:
            return None
        correct = 0
        for s in pool:
            pred = net_mod.classify(self.network, self._input_from_pixels(s.pixels))
            correct += self.original_of(pred.class_id) == s.label
        return correct / len(pool)

    def _input_from_pixels(self, pixels: np.ndarray):
        ds = self.stream.dataset
        from .data import InputSample

        return InputSample(pixels, ds.width, ds.height, ds.channels)

    # --- the monitoring step ---

    def step(self) -> StepResult:
        if self.cursor >= len(self.stream):
            raise StreamExhausted(f"stream ended after {len(self.stream)} inputs")

        sample = self.stream.input_at(self.cursor)
        prediction = net_mod.classify(self.network, sample)
        predicted_original = self.original_of(prediction.class_id)
        verdict = self.strategy.verdict(prediction)

        if not verdict.warning:
            self.cursor += 1
            return StepResult(predicted_original, warned=False, queried=False)

        payload = dict(input=self.cursor, predicted=predicted_original)
        if verdict.confidence is not None:
            payload["confidence"] = verdict.confidence
        self.log(reporting.WARNING, **payload)

        if self.stats.queries_used >= self.stats.budget:
            self.log(
                reporting.UNLABELED_WARNING, input=self.cursor, predicted=predicted_original
            )
            self.cursor += 1
            return StepResult(predicted_original, warned=True, queried=False)

        query = AuthorityQuery(
            query_id=self._query_counter,
            input_index=self.cursor,
            pixels=sample.pixels,
            width=sample.width,
            height=sample.height,
            channels=sample.channels,
            predicted_class=predicted_original,
            predicted_name=self.class_name(predicted_original),
            confidence=verdict.confidence,
            enqueued_at=self.cursor,
        )
        self._query_counter += 1
        self.log(
            reporting.QUERY,
            query_id=query.query_id,
            input=self.cursor,
            predicted=predicted_original,
        )
        answer = self.authority.ask(query)
        if answer is None:
            # timeout: budget-preserving skip, no collection, no adaptation
            self.log(reporting.QUERY_TIMEOUT, query_id=query.query_id, input=self.cursor)
            self.cursor += 1
            return StepResult(predicted_original, warned=True, queried=False)

        true_class = answer.true_class
        self.stats.queries_used += 1
        correct_warning = true_class != predicted_original
        self.log(
            reporting.ANSWER,
            query_id=query.query_id,
            true=true_class,
            outcome="tp" if correct_warning else "fp",
        )
        self._collect(sample.pixels, true_class)
        self.stats.monitor_cumulative.record(predicted_original, correct_warning)
        self.stats.monitor_window.record(predicted_original, correct_warning)
        self._last_fp = None if correct_warning else (predicted_original, verdict.confidence)

        decision = self._evaluate(last_answer_fp=not correct_warning)
        if decision == DECISION_ADAPT_MODEL:
            self._adapt_model()
        elif decision == DECISION_ADAPT_MONITOR:
            self._adapt_monitor()

        self.cursor += 1
        return StepResult(
            predicted_original, warned=True, queried=True, answer_class=true_class
        )

    def _collect(self, pixels: np.ndarray, label: int) -> None:
        index = self.stats.collected_since_retrain
        in_pool = index % EVAL_POOL_STRIDE == EVAL_POOL_STRIDE - 1
        self.collected.append(CollectedSample(pixels.copy(), label, in_pool))
        self.stats.collected_since_retrain = index + 1
        self.stats.s_samples[label] = self.stats.s_samples.get(label, 0) + 1

    def _evaluate(self, last_answer_fp: bool) -> str:
        known = set(self.vocabulary)
        unknown_counts = {
            c: n for c, n in self.stats.s_samples.items() if c not in known
        }
        return decide(
            unknown_counts,
            self.hyper.n_star,
            self.s_network(),
            self.hyper.tau_star,
            last_answer_fp,
            self.stats.monitor_window.precision(),
            self.hyper.kappa_star,
            self.strategy.adapts_monitor,
        )

    # --- adaptation stages ---

    def _adapt_monitor(self) -> None:
        assert self._last_fp is not None
        self.mode = self.MODE_ADAPTING_MONITOR
        original_class, distance = self._last_fp
        dense = self.dense_of(original_class)
        strategy = self.strategy
        assert isinstance(strategy, QuantitativeStrategy)

        valuations = net_mod.observe_features(
            self.network, self.class_pixels(original_class)
        )
        seed = _derive(self.config.seed, 11, self.stats.monitor_adaptations)
        strategy.monitor = monitors.adapt_centers(strategy.monitor, dense, valuations, seed)

        old = strategy.monitor.thresholds[dense]
        new = old
        if self.config.threshold_mode == "dynamic" and distance is not None and distance > old:
            strategy.monitor = monitors.adapt_threshold(
                strategy.monitor,
                dense,
                distance,
                self.stats.s_samples.get(original_class, 0),
                self.hyper.n_star,
            )
            new = strategy.monitor.thresholds[dense]

        self.stats.monitor_window = MonitorStats()
        self.stats.monitor_adaptations += 1
        self.log(
            reporting.ADAPT_MONITOR,
            **{"class": original_class, "old": old, "new": new},
        )
        self.mode = self.MODE_MONITORING

    def _adapt_model(self) -> None:
        self.mode = self.MODE_ADAPTING_MODEL
        known = set(self.vocabulary)
        learning = sorted(
            c
            for c, n in self.stats.s_samples.items()
            if c not in known and n >= self.hyper.n_star
        )
        if not learning and self.hyper.tau_star is None:
            raise InsufficientData("model adaptation triggered without a learnable class")

        # every class about to be learned needs at least one retrain sample
        for c in learning:
            rows = [s for s in self.collected if s.label == c]
            if all(s.in_eval_pool for s in rows):
                rows[0].in_eval_pool = False

        classes_before = len(self.vocabulary)
        self.vocabulary.extend(learning)
        retrain = self.retrain_dataset()
        train_config = TrainConfig(
            epochs=self.config.epochs_run,
            batch_size=self.config.train_batch_size,
            learning_rate=self.config.learning_rate,
            seed=_derive(self.config.seed, 13, self.stats.model_adaptations),
        )
        if learning:
            self.network = net_mod.transfer_extend(
                self.network, len(self.vocabulary), retrain, train_config
            )
        else:
            self.network = net_mod.retrain_head(self.network, retrain, train_config)

        if self.strategy.uses_cluster_monitor:
            monitor, _ = build_monitor(
                self.network,
                self.monitor_dataset(),
                self.config,
                seed=_derive(self.config.seed, 17, self.stats.model_adaptations),
            )
            # existing classes keep their adapted thresholds (they only ever
            # grow within a session); the new classes start at 1
            previous = self.strategy.monitor.thresholds
            carried = {
                dense: previous.get(dense, monitors.INITIAL_THRESHOLD)
                for dense in monitor.thresholds
            }
            self.strategy.monitor = dataclass_replace(monitor, thresholds=carried)

        # reset the measurement windows: new model, new evaluation pool
        for s in self.collected:
            s.in_eval_pool = False
        self.stats.collected_since_retrain = 0
        self.stats.monitor_window = MonitorStats()
        self.stats.model_adaptations += 1
        self.log(
            reporting.ADAPT_MODEL,
            trigger="B.1" if learning else "B.2",
            learned=learning,
            classes_before=classes_before,
            classes_after=len(self.vocabulary),
        )
        self.mode = self.MODE_MONITORING

    # --- batch loop ---

    def run(self, max_batches: int | None = None) -> None:
        """Process the stream in batches, recording one metrics row each."""
        if self.cursor == 0 and not self.events:
            self.log(
                reporting.RUN_START,
                strategy=self.strategy.name,
                budget=self.stats.budget,
                n_star=self.hyper.n_star,
                stream=len(self.stream),
            )
        batches_done = 0
        while self.cursor < len(self.stream):
            if max_batches is not None and batches_done >= max_batches:
                break
            # batch boundaries are absolute stream positions, stable across
            # save/restore in the middle of a batch
            size = self.stream.batch_size
            end = min((self.cursor // size + 1) * size, len(self.stream))
            while self.cursor < end:
                self.step()
            self.metrics_rows.append(
                reporting.metrics_row(
                    self.batch_index,
                    self.cursor,
                    self.stats.queries_used,
                    len(self.vocabulary),
                    self.stats.monitor_cumulative.precision(),
                    self.s_network(),
                    self._pending_batch_events,
                )
            )
            self._pending_batch_events = []
            self.batch_index += 1
            batches_done += 1

    def finished(self) -> bool:
        return self.cursor >= len(self.stream)

    def metrics_csv(self) -> str:
        return "\n".join([reporting.METRICS_HEADER, *self.metrics_rows]) + "\n"

    def event_log_text(self) -> str:
        return "\n".join(e.line() for e in self.events) + "\n"

    def network_test_accuracy(self) -> float | None:
        """Adapted-network accuracy on test samples of currently known classes."""
        if self.test_dataset is None or len(self.test_dataset) == 0:
            return None
        mask = np.isin(self.test_dataset.labels, self.vocabulary)
        if not mask.any():
            return None
        dense = np.array(
            [self.dense_of(l) for l in self.test_dataset.labels[mask]], dtype=np.int64
        )
        subset = self._dense_dataset(self.test_dataset.pixels[mask], dense)
        return net_mod.test_accuracy(self.network, subset)

    def final_summary(self) -> dict:
        return {
            "final_precision": self.stats.monitor_cumulative.precision(),
            "known_classes": len(self.vocabulary),
            "network_accuracy": self.network_test_accuracy(),
        }


# --- session assembly ------------------------------------------------------


@dataclass
class Experiment:
    """Everything deterministic that a session is built from."""

    config: RunConfig
    full_train: Dataset
    full_test: Dataset | None  # original labels, all classes
    known_test: Dataset | None  # dense labels over the initial vocabulary
    base_pixels: np.ndarray
    base_labels: np.ndarray  # original vocabulary
    vocabulary: list[int]
    original_network: Network
    initial_accuracy: float | None
    stream: StreamSpec
    hyper: Hyperparameters


def load_train_test(config: RunConfig) -> tuple[Dataset, Dataset | None]:
    if config.dataset_kind == "synthetic":
        train = make_synthetic_blobs(
            config.synth_classes,
            config.synth_dim,
            config.synth_per_class,
            config.synth_spread,
            seed=_derive(config.seed, 23),
        )
        test = make_synthetic_blobs(
            config.synth_classes,
            config.synth_dim,
            max(50, config.synth_per_class // 4),
            config.synth_spread,
            seed=_derive(config.seed, 29),
        )
        return train, test
    if config.dataset_kind == "idx":
        train = load_idx(config.train_images, config.train_labels)
        test = (
            load_idx(config.test_images, config.test_labels)
            if config.test_images and config.test_labels
            else None
        )
        return train, test
    train = load_csv(config.train_csv)
    test = load_csv(config.test_csv) if config.test_csv else None
    return train, test


def build_base_dataset(config: RunConfig, full_train: Dataset) -> tuple[Dataset, np.ndarray]:
    """Initial X: the known-class half, optionally subsampled per class.

    Returns the dense-labeled training view plus the same labels in the
    original vocabulary.
    """
    known = set(config.known_classes)
    split = split_known_unknown(full_train, known)
    base = split.known
    if config.init_per_class > 0:
        rng = np.random.default_rng(_derive(config.seed, 31))
        keep = []
        for dense in range(base.num_classes):
            idx = np.nonzero(base.labels == dense)[0]
            take = min(config.init_per_class, len(idx))
            keep.append(rng.choice(idx, size=take, replace=False))
        base = base.subset(np.sort(np.concatenate(keep)))
    inverse = {dense: orig for orig, dense in split.class_map.items()}
    base_labels = np.array([inverse[l] for l in base.labels], dtype=np.int64)
    return base, base_labels


def build_stream(config: RunConfig, full_train: Dataset) -> StreamSpec:
    known = set(config.known_classes)
    if config.stream_mode == "phased":
        stream = phased_stream(full_train, known, config.seed, config.batch_size)
    else:
        stream = shuffle_stream(full_train, config.seed, config.batch_size)
    if config.stream_limit > 0 and config.stream_limit < len(stream):
        stream = StreamSpec(
            full_train.subset(stream.order[: config.stream_limit]),
            np.arange(config.stream_limit),
            config.seed,
            config.batch_size,
        )
    return stream


def prepare_experiment(config: RunConfig) -> Experiment:
    config.validate()
    full_train, full_test = load_train_test(config)

    known = set(config.known_classes)
    base, base_labels = build_base_dataset(config, full_train)

    vocabulary = sorted(known)
    arch = NetworkArch(
        full_train.input_dim,
        config.hidden_layers,
        config.feature_layer_index(),
        len(vocabulary),
    )
    train_config = TrainConfig(
        epochs=config.epochs_init,
        batch_size=config.train_batch_size,
        learning_rate=config.learning_rate,
        seed=_derive(config.seed, 37),
    )
    original_network, _ = net_mod.train(arch, base, train_config)

    known_test = None
    initial_accuracy = None
    tau_star = None
    if full_test is not None and len(full_test):
        known_test = split_known_unknown(full_test, known).known
        if len(known_test):
            initial_accuracy = net_mod.test_accuracy(original_network, known_test)
            tau_star = 0.95 * initial_accuracy

    stream = build_stream(config, full_train)

    n_star = max(1, round(config.n_star_fraction * len(base) / len(vocabulary)))
    hyper = Hyperparameters(
        tau_star=tau_star,
        n_star=n_star,
        kappa_star=config.kappa_star,
        budget_fraction=config.p,
        batch_size=config.batch_size,
        n_star_fraction=config.n_star_fraction,
    )

    return Experiment(
        config=config,
        full_train=full_train,
        full_test=full_test,
        known_test=known_test,
        base_pixels=base.pixels,
        base_labels=base_labels,
        vocabulary=vocabulary,
        original_network=original_network,
        initial_accuracy=initial_accuracy,
        stream=stream,
        hyper=hyper,
    )


def make_strategy(config: RunConfig, experiment: Experiment) -> Strategy:
    name = config.strategy
    if name in ("quantitative", "box"):
        dense = Dataset(
            experiment.base_pixels,
            np.array(
                [experiment.vocabulary.index(l) for l in experiment.base_labels],
                dtype=np.int64,
            ),
            experiment.full_train.width,
            experiment.full_train.height,
            experiment.full_train.channels,
            tuple(experiment.full_train.class_names[c] for c in experiment.vocabulary),
        )
        monitor, _ = build_monitor(
            experiment.original_network, dense, config, seed=_derive(config.seed, 41)
        )
        if name == "quantitative":
            return QuantitativeStrategy(monitor)
        return BoxStrategy(monitor)
    if name == "softmax":
        return SoftmaxStrategy(config.softmax_threshold)
    rng = np.random.default_rng(_derive(config.seed, 43))
    return RandomStrategy(config.resolved_random_rate(), rng)


def create_session(
    config: RunConfig,
    authority: Authority | None = None,
    experiment: Experiment | None = None,
) -> Session:
    exp = experiment if experiment is not None else prepare_experiment(config)
    strategy = make_strategy(config, exp)
    session = Session(
        config=config,
        stream=exp.stream,
        original_network=exp.original_network,
        strategy=strategy,
        base_pixels=exp.base_pixels,
        base_labels=exp.base_labels,
        vocabulary=exp.vocabulary,
        class_names=exp.full_train.class_names,
        hyper=exp.hyper,
        authority=authority if authority is not None else OracleAuthority(exp.stream),
    )
    session.test_dataset = exp.full_test
    return session


def compare_strategies(
    config: RunConfig,
    strategies: tuple[str, ...] = ("quantitative", "box", "softmax", "random"),
) -> dict[str, Session]:
    """Run each strategy over the identical stream, budget, and model."""
    if not strategies:
        raise ValueError("need at least one strategy")
    sessions: dict[str, Session] = {}
    experiment = prepare_experiment(config)
    for name in strategies:
        cfg = copy.copy(config)
        cfg.strategy = name
        exp = dataclass_replace(
            experiment, config=cfg, vocabulary=list(experiment.vocabulary)
        )
        session = create_session(cfg, experiment=exp)
        session.run()
        sessions[name] = session
    return sessions
