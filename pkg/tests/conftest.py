import numpy as np
import pytest

from kcgen.discovery import (
    build_inventory,
    context_representations,
    submission_scored_subtrees,
)
from kcgen.sann import SannHyperparams, train_sann
from kcgen.synth import (
    corpus_to_training_pairs,
    generate_corpus,
    planted_signature_sets,
)
from kcgen.vae import VaeHyperparams, train_vae


@pytest.fixture(scope="session")
def mini_pipeline():
    """Small end-to-end trained pipeline over the synthetic corpus."""
    corpus, planted_map = generate_corpus(seed=0, students_per_problem=50)
    pairs = corpus_to_training_pairs(corpus)
    sann = train_sann(pairs, SannHyperparams(d_emb=16, d_enc=16), seed=1)

    latents_inputs = []
    for sub in corpus.submissions:
        if not sub.is_correct:
            continue
        scored = submission_scored_subtrees(sub, sann, threshold=0.5)
        latents_inputs.extend(context_representations(scored))
    x = np.stack(latents_inputs)
    vae = train_vae(x, VaeHyperparams(d_in=x.shape[1], d_z=8, epochs=100), seed=2)

    from kcgen.vae import encode_latent

    zs = np.stack([encode_latent(vae, xi) for xi in x])
    inventory = build_inventory(zs, k=8, seed=3)
    return {
        "corpus": corpus,
        "planted_map": planted_map,
        "sann": sann,
        "vae": vae,
        "inventory": inventory,
        "signature_sets": planted_signature_sets(),
    }
