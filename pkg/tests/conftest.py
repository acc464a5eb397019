import pytest
import torch


@pytest.fixture(autouse=True, scope="session")
def _single_thread_torch():
    torch.set_num_threads(1)


@pytest.fixture(scope="session")
def small_corpus():
    """Shared 8-speaker corpus for tests that just need valid data."""
    from ada_sv.corpus import CorpusConfig, build_corpus

    cfg = CorpusConfig(
        n_speakers=8,
        utts_per_speaker=4,
        duration_range_s=(0.8, 1.2),
        noise_pool_size=3,
        noise_pool_duration_s=2.0,
    )
    return build_corpus(cfg, seed=1234)
