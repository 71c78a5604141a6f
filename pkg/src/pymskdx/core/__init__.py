#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Lógica de dominio: vocabulario, prompts, gateway, parseo, votación, partición y métricas."""
