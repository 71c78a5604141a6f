#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Logger, normalización de texto, digests y redondeo bfloat16."""
