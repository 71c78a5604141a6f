"""Núcleo numérico de QLoRA: cuantización NF4, álgebra LoRA, pérdida enmascarada y conteo de parámetros."""
