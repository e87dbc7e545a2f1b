from vcmmap.cli import main

raise SystemExit(main())
