"""Case ingestion: canonical images, anonymized metadata, exports."""
