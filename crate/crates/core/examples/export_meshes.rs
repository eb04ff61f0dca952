//! Write the built-in test meshes as OBJ files.
//!
//! Usage: `cargo run -p colorpose-core --example export_meshes -- <dir>`

use std::env;
use std::fs;
use std::path::PathBuf;

use colorpose_core::shapes;

fn main() {
    let dir = PathBuf::from(env::args().nth(1).unwrap_or_else(|| ".".into()));
    fs::create_dir_all(&dir).expect("create output directory");
    let meshes = [
        ("bracket.obj", shapes::bracket_mesh::<f64>()),
        ("plate.obj", shapes::plate_mesh::<f64>()),
        ("roof.obj", shapes::roof_mesh::<f64>()),
    ];
    for (name, mesh) in meshes {
        let path = dir.join(name);
        fs::write(&path, mesh.to_obj_string()).expect("write obj");
        println!(
            "{}: {} vertices, {} faces, diameter {:.4} m",
            path.display(),
            mesh.vertices().len(),
            mesh.faces().len(),
            mesh.diameter()
        );
    }
}
