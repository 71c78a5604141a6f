#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Configuración (pydantic-settings) y carga de módulos de settings."""
