"""Dense retrieval: embedding clients, vector store, dot-product search."""

from .clients import (
    CACHE_DIR_ENV,
    EMBEDDING_MODELS,
    EmbeddingClient,
    EmbeddingModelSpec,
    HashEmbeddingClient,
    HttpEmbeddingClient,
)
from .store import (
    EmbeddingVector,
    VectorStore,
    build_vector_store,
    dot,
    embed,
    load_vector_store,
    normalize,
    save_vector_store,
    search_dense,
)

__all__ = [
    "CACHE_DIR_ENV",
    "EMBEDDING_MODELS",
    "EmbeddingClient",
    "EmbeddingModelSpec",
    "EmbeddingVector",
    "HashEmbeddingClient",
    "HttpEmbeddingClient",
    "VectorStore",
    "build_vector_store",
    "dot",
    "embed",
    "load_vector_store",
    "normalize",
    "save_vector_store",
    "search_dense",
]
