"""amrkit-export: dump sentence-encoder embeddings in the amrkit file format."""

from .exporter import ExportJob, export_embeddings

__all__ = ["ExportJob", "export_embeddings"]

__version__ = "0.1.0"
